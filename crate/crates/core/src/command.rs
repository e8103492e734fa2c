use serde::{Deserialize, Serialize};

use crate::ids::{CourseId, ParticipantId, ReviewId, RoundId, TaskId};
use crate::model::{CourseConfig, Phase};
use crate::Timestamp;
use std::collections::BTreeMap;

/// Requests understood by [`crate::Course::decide`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    CreateCourse {
        course: CourseId,
        config: CourseConfig,
    },
    Enroll {
        display_name: String,
    },
    /// Opens the next round. `roster: None` enrolls everyone currently in the course.
    CreateRound {
        roster: Option<Vec<ParticipantId>>,
        #[serde(default)]
        deadlines: BTreeMap<Phase, Timestamp>,
    },
    SubmitAssignment {
        round: RoundId,
        participant: ParticipantId,
        content_ref: String,
    },
    RecordIntro {
        participant: ParticipantId,
        text: String,
    },
    AdvancePhase {
        round: RoundId,
        target: Phase,
        #[serde(default)]
        force: bool,
    },
    SubmitReview {
        task: TaskId,
        reviewer: ParticipantId,
        prompts: Vec<String>,
        grade: i64,
    },
    RateFeedback {
        review: ReviewId,
        rater: ParticipantId,
        stars: i64,
    },
    PostMessage {
        review: ReviewId,
        sender: ParticipantId,
        body: String,
    },
}
