//! Domain model for identified peer review courses.
//!
//! A [`Course`] is an event-sourced aggregate. Commands are validated by
//! [`Course::decide`], which returns the [`Event`]s they produce without
//! touching state; [`Course::apply`] folds events into state. Persisting the
//! events between the two steps and replaying them later yields the same
//! course, which is what the store and the HTTP service rely on.
//!
//! Each round walks `submission -> reviewing -> rating -> released`. Entering
//! `reviewing` runs the reviewer matcher once and records the resulting
//! tasks. Grades written about a student are withheld from every read path
//! until that student has rated all of the feedback they received.

mod command;
mod course;
mod error;
mod event;
mod gating;
mod ids;
mod model;
mod nudge;
mod view;

pub use command::Command;
pub use course::Course;
pub use error::{ApplyError, DomainError};
pub use event::{DomainEvent, Event, UsefulnessSummary};
pub use gating::lower_median;
pub use ids::{CourseId, ParticipantId, ReviewId, RoundId, TaskId};
pub use model::{
    Condition, CourseConfig, CourseRound, GradeReport, Message, Participant, Phase, Review, ReviewTask, Round,
    Submission, TaskStatus, UsefulnessEntry, UsefulnessRating,
};
pub use nudge::{actionability_nudge, word_count, ACTIONABILITY_NUDGE, DEFAULT_NUDGE_THRESHOLD};
pub use view::{FeedbackView, MessageView, PersonView, SenderRole, TaskView, ANONYMOUS_AUTHOR, ANONYMOUS_REVIEWER};

/// Limits on free-text fields.
pub mod limits {
    pub const INTRO_CHARS: usize = 500;
    pub const PROMPT_CHARS: usize = 4000;
    pub const MESSAGE_CHARS: usize = 2000;
    pub const DISPLAY_NAME_CHARS: usize = 100;
    pub const CONTENT_REF_CHARS: usize = 100_000;
    pub const PROMPTS: usize = 4;
}

pub type Timestamp = chrono::DateTime<chrono::Utc>;
