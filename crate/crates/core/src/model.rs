use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ipr_matching::{AssignmentSet, Policy};
use serde::{Deserialize, Serialize};

use crate::ids::{ParticipantId, ReviewId, RoundId, TaskId};
use crate::nudge::DEFAULT_NUDGE_THRESHOLD;
use crate::Timestamp;

/// Experimental condition a course runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Reviewers and authors hidden from each other, random matching.
    BlindRandom,
    /// Reviewer introductions shown, random matching.
    IdentifiedRandom,
    /// Reviewer introductions shown, usefulness-ranked matching.
    IdentifiedIncentive,
}

impl Condition {
    pub const ALL: [Condition; 3] =
        [Condition::BlindRandom, Condition::IdentifiedRandom, Condition::IdentifiedIncentive];

    pub fn is_blind(self) -> bool {
        matches!(self, Condition::BlindRandom)
    }

    pub fn policy(self) -> Policy {
        match self {
            Condition::BlindRandom | Condition::IdentifiedRandom => Policy::Random,
            Condition::IdentifiedIncentive => Policy::Incentive,
        }
    }

    /// Hyphenated name used on command lines and in CSV output.
    pub fn slug(self) -> &'static str {
        match self {
            Condition::BlindRandom => "blind-random",
            Condition::IdentifiedRandom => "identified-random",
            Condition::IdentifiedIncentive => "identified-incentive",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "blind-random" => Ok(Condition::BlindRandom),
            "identified-random" => Ok(Condition::IdentifiedRandom),
            "identified-incentive" => Ok(Condition::IdentifiedIncentive),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Submission,
    Reviewing,
    Rating,
    Released,
}

impl Phase {
    pub fn next(self) -> Option<Phase> {
        match self {
            Phase::Submission => Some(Phase::Reviewing),
            Phase::Reviewing => Some(Phase::Rating),
            Phase::Rating => Some(Phase::Released),
            Phase::Released => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Submission => "submission",
            Phase::Reviewing => "reviewing",
            Phase::Rating => "rating",
            Phase::Released => "released",
        })
    }
}

/// Per-course settings. Fixed once the course exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CourseConfig {
    pub condition: Condition,
    pub k: usize,
    pub grade_min: i64,
    pub grade_max: i64,
    pub nudge_threshold: usize,
    pub seed: u64,
    pub deadlines: BTreeMap<Phase, Timestamp>,
}

impl Default for CourseConfig {
    fn default() -> Self {
        Self {
            condition: Condition::IdentifiedIncentive,
            k: 3,
            grade_min: 0,
            grade_max: 100,
            nudge_threshold: DEFAULT_NUDGE_THRESHOLD,
            seed: 0,
            deadlines: BTreeMap::new(),
        }
    }
}

impl CourseConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        if self.grade_min > self.grade_max {
            return Err(format!("grade_min {} exceeds grade_max {}", self.grade_min, self.grade_max));
        }
        Ok(())
    }

    /// Seed for round `number`, so rounds draw independent streams.
    pub fn round_seed(&self, number: u32) -> u64 {
        self.seed ^ u64::from(number).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessEntry {
    pub round: RoundId,
    /// Mean stars received on reviews written that round, in [1, 5].
    pub mean: f64,
    pub ratings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Participant {
    pub id: ParticipantId,
    pub display_name: String,
    pub intro: Option<String>,
    pub usefulness_history: Vec<UsefulnessEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourseRound {
    pub round_id: RoundId,
    pub number: u32,
    pub condition: Condition,
    pub phase: Phase,
    pub k: usize,
    pub roster: BTreeSet<ParticipantId>,
    pub deadlines: BTreeMap<Phase, Timestamp>,
    pub rng_seed: u64,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub author: ParticipantId,
    pub round: RoundId,
    pub content_ref: String,
    pub submitted_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Pending,
    Reviewed,
    Rated,
    /// Still pending when reviewing closed; no review will arrive.
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewTask {
    pub id: TaskId,
    pub reviewer: ParticipantId,
    pub author: ParticipantId,
    pub round: RoundId,
    pub status: TaskStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: ReviewId,
    pub task: TaskId,
    pub round: RoundId,
    pub reviewer: ParticipantId,
    pub author: ParticipantId,
    pub prompts: [String; 4],
    pub grade: i64,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsefulnessRating {
    pub review: ReviewId,
    pub rater: ParticipantId,
    pub stars: u8,
    pub rated_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub review: ReviewId,
    pub sender: ParticipantId,
    pub body: String,
    pub sent_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeReport {
    pub participant: ParticipantId,
    pub round: RoundId,
    pub per_review_grades: Vec<i64>,
    /// Lower median of `per_review_grades`; absent when no review arrived.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<i64>,
}

/// Everything recorded for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub meta: CourseRound,
    pub submissions: BTreeMap<ParticipantId, Submission>,
    pub assignment: Option<AssignmentSet>,
    /// Usefulness scores the matcher saw when the assignment was built.
    pub matching_scores: BTreeMap<ParticipantId, f64>,
    pub tasks: BTreeMap<TaskId, ReviewTask>,
    pub reviews: BTreeMap<ReviewId, Review>,
    pub ratings: BTreeMap<ReviewId, UsefulnessRating>,
    pub messages: BTreeMap<ReviewId, Vec<Message>>,
    pub released_at: Option<Timestamp>,
}

impl Round {
    pub(crate) fn new(meta: CourseRound) -> Self {
        Self {
            meta,
            submissions: BTreeMap::new(),
            assignment: None,
            matching_scores: BTreeMap::new(),
            tasks: BTreeMap::new(),
            reviews: BTreeMap::new(),
            ratings: BTreeMap::new(),
            messages: BTreeMap::new(),
            released_at: None,
        }
    }

    pub fn id(&self) -> &RoundId {
        &self.meta.round_id
    }

    pub fn phase(&self) -> Phase {
        self.meta.phase
    }

    pub fn reviews_received<'a>(&'a self, author: &'a ParticipantId) -> impl Iterator<Item = &'a Review> + 'a {
        self.reviews.values().filter(move |r| &r.author == author)
    }

    pub fn reviews_written<'a>(&'a self, reviewer: &'a ParticipantId) -> impl Iterator<Item = &'a Review> + 'a {
        self.reviews.values().filter(move |r| &r.reviewer == reviewer)
    }

    pub fn pending_tasks(&self) -> impl Iterator<Item = &ReviewTask> {
        self.tasks.values().filter(|t| t.status == TaskStatus::Pending)
    }
}
