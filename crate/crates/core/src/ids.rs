use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(raw: impl Into<String>) -> Self {
                Self(raw.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            /// Course this identifier belongs to (the text before the first `.`).
            pub fn course(&self) -> CourseId {
                CourseId(self.0.split('.').next().unwrap_or_default().to_string())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                Self(raw.to_string())
            }
        }

        impl From<String> for $name {
            fn from(raw: String) -> Self {
                Self(raw)
            }
        }
    };
}

string_id!(
    /// Course identifier. Never contains `.`; every other id is prefixed with it.
    CourseId
);
string_id!(ParticipantId);
string_id!(RoundId);
string_id!(TaskId);
string_id!(ReviewId);

impl CourseId {
    pub fn is_well_formed(raw: &str) -> bool {
        !raw.is_empty() && raw.len() <= 64 && raw.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    }

    pub(crate) fn participant(&self, n: usize) -> ParticipantId {
        ParticipantId(format!("{}.p{n}", self.0))
    }

    pub(crate) fn round(&self, n: u32) -> RoundId {
        RoundId(format!("{}.r{n}", self.0))
    }
}

impl RoundId {
    pub(crate) fn task(&self, n: usize) -> TaskId {
        TaskId(format!("{}.t{n}", self.0))
    }

    fn prefix_of(raw: &str) -> RoundId {
        let mut parts = raw.splitn(3, '.');
        let course = parts.next().unwrap_or_default();
        let round = parts.next().unwrap_or_default();
        RoundId(format!("{course}.{round}"))
    }
}

impl TaskId {
    pub fn round(&self) -> RoundId {
        RoundId::prefix_of(&self.0)
    }

    /// The review written for this task shares its number.
    pub fn review_id(&self) -> ReviewId {
        match self.0.rsplit_once(".t") {
            Some((head, n)) => ReviewId(format!("{head}.v{n}")),
            None => ReviewId(format!("{}.v", self.0)),
        }
    }
}

impl ReviewId {
    pub fn round(&self) -> RoundId {
        RoundId::prefix_of(&self.0)
    }

    pub fn task_id(&self) -> TaskId {
        match self.0.rsplit_once(".v") {
            Some((head, n)) => TaskId(format!("{head}.t{n}")),
            None => TaskId(format!("{}.t", self.0)),
        }
    }
}
