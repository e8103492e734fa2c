//! Reviewer assignment for peer review rounds.
//!
//! Every round places the submitting students on a ring and has the student at
//! position `j` reviewed by the `d` students that follow it, `d = min(k, n - 1)`.
//! The policies differ only in how the ring is ordered:
//!
//! - [`Policy::Random`] shuffles submitters with a seeded generator.
//! - [`Policy::Incentive`] sorts them by [`UsefulnessScore`], highest first, so
//!   students who wrote useful feedback are reviewed by students who did too.
//!
//! [`validate_assignment`] checks the fan-out invariants independently of the
//! constructor and [`assortativity`] measures how strongly reviewer quality
//! tracks author quality for a finished assignment.

mod assign;
mod assortativity;
mod score;
mod validate;

pub use assign::{assign_reviewers, effective_fan_out, tie_break_key, AssignmentSet, Pair, Policy};
pub use assortativity::{assortativity, assortativity_with, spearman, Assortativity, Scope};
pub use score::{usefulness_score, UsefulnessScore, COLD_START_SCORE};
pub use validate::{validate_assignment, ValidityReport, Violation};

/// Errors raised while building an assignment.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchingError {
    #[error("at least two submitters are required, got {0}")]
    TooFewSubmitters(usize),
    #[error("fan-out k must be at least 1")]
    ZeroFanOut,
    #[error("submitter {0:?} listed more than once")]
    DuplicateSubmitter(String),
    #[error("no usefulness score for {0:?}")]
    MissingScore(String),
}
