//! Agent-based simulation of peer review rounds, plus the statistics used to
//! compare conditions.
//!
//! [`run_simulation`] enrolls a synthetic cohort in a real [`ipr_core::Course`]
//! and plays every round through submission, matching, review, rating and
//! release. All randomness derives from the seed, so identical configurations
//! produce identical metrics and byte-identical CSV.

mod agents;
pub mod cli;
mod metrics;
mod simulate;
pub mod stats;

use std::path::PathBuf;

pub use agents::{AgentProfile, ConditionEffect, Population, QualityDist};
pub use metrics::{export_csv, grade_gap, write_rows, MetricRow, RoundMetrics, CSV_HEADER};
pub use simulate::{review_words, run_simulation, SimConfig, Simulation, COURSE_ID};
pub use stats::{mean, percentile, pooled_t_test, std_dev, StatsError, Summary, TTest};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("cannot write {}: {source}", path.display())]
    IoFailure { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Domain(#[from] ipr_core::DomainError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}
