use std::collections::BTreeMap;

use ipr_matching::AssignmentSet;
use serde::{Deserialize, Serialize};

use crate::ids::{CourseId, ParticipantId, RoundId, TaskId};
use crate::model::{CourseConfig, CourseRound, Message, Phase, Review, ReviewTask, Submission, UsefulnessRating};
use crate::Timestamp;

/// A recorded state change, numbered within its course.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub ts: Timestamp,
    #[serde(flatten)]
    pub change: DomainEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum DomainEvent {
    CourseCreated {
        course: CourseId,
        config: CourseConfig,
    },
    ParticipantEnrolled {
        participant: ParticipantId,
        display_name: String,
    },
    RoundCreated {
        round: CourseRound,
    },
    SubmissionMade {
        submission: Submission,
    },
    IntroRecorded {
        participant: ParticipantId,
        intro: String,
    },
    PhaseAdvanced {
        round: RoundId,
        from: Phase,
        to: Phase,
        /// Tasks still pending when reviewing closed.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        expired: Vec<TaskId>,
    },
    AssignmentCreated {
        round: RoundId,
        assignment: AssignmentSet,
        scores: BTreeMap<ParticipantId, f64>,
        tasks: Vec<ReviewTask>,
    },
    ReviewSubmitted {
        review: Review,
    },
    FeedbackRated {
        rating: UsefulnessRating,
    },
    MessagePosted {
        message: Message,
    },
    GradesReleased {
        round: RoundId,
        usefulness: Vec<UsefulnessSummary>,
    },
}

/// A reviewer's mean usefulness for one round, fixed at release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessSummary {
    pub participant: ParticipantId,
    pub mean: f64,
    pub ratings: usize,
}

impl DomainEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            DomainEvent::CourseCreated { .. } => "CourseCreated",
            DomainEvent::ParticipantEnrolled { .. } => "ParticipantEnrolled",
            DomainEvent::RoundCreated { .. } => "RoundCreated",
            DomainEvent::SubmissionMade { .. } => "SubmissionMade",
            DomainEvent::IntroRecorded { .. } => "IntroRecorded",
            DomainEvent::PhaseAdvanced { .. } => "PhaseAdvanced",
            DomainEvent::AssignmentCreated { .. } => "AssignmentCreated",
            DomainEvent::ReviewSubmitted { .. } => "ReviewSubmitted",
            DomainEvent::FeedbackRated { .. } => "FeedbackRated",
            DomainEvent::MessagePosted { .. } => "MessagePosted",
            DomainEvent::GradesReleased { .. } => "GradesReleased",
        }
    }
}
