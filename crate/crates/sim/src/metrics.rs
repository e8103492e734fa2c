//! Per-round measurements and their CSV form.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ipr_core::{Condition, Course, ParticipantId, Phase, RoundId, TaskStatus};
use ipr_matching::{assortativity, Assortativity};
use serde::{Deserialize, Serialize};

use crate::simulate::review_words;
use crate::stats::{spread_90_10, StatsError, Summary};
use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub round: u32,
    pub condition: Condition,
    pub cohort: usize,
    pub fan_out: usize,
    pub tasks: usize,
    pub reviews: usize,
    pub expired: usize,
    pub ratings: usize,
    pub messages: usize,
    /// Stars given this round.
    pub usefulness: Summary,
    /// Words per review.
    pub review_words: Summary,
    /// Messages per review thread.
    pub thread_messages: Summary,
    pub assortativity: Assortativity,
    pub released: bool,
    /// Aggregate grade per participant; `None` when they received no reviews.
    pub grades: BTreeMap<ParticipantId, Option<i64>>,
}

impl RoundMetrics {
    pub fn collect(course: &Course, round_id: &RoundId) -> Result<Self, SimError> {
        let round = course.round(round_id)?;
        let stars: Vec<f64> = round.ratings.values().map(|r| f64::from(r.stars)).collect();
        let words: Vec<f64> = round.reviews.values().map(|r| review_words(r) as f64).collect();
        let threads: Vec<f64> =
            round.reviews.keys().map(|id| round.messages.get(id).map_or(0, Vec::len) as f64).collect();
        let assort = match &round.assignment {
            Some(set) => {
                let scores: BTreeMap<String, f64> =
                    round.matching_scores.iter().map(|(p, v)| (p.to_string(), *v)).collect();
                assortativity(set, &scores).map_err(ipr_core::DomainError::from)?
            }
            None => Assortativity { value: 0.0, degenerate: true, authors: 0 },
        };
        let released = round.phase() == Phase::Released;
        let grades = if released {
            round
                .meta
                .roster
                .iter()
                .map(|p| Ok((p.clone(), course.grade_report(round_id, p)?.aggregate)))
                .collect::<Result<_, SimError>>()?
        } else {
            BTreeMap::new()
        };
        Ok(Self {
            round: round.meta.number,
            condition: round.meta.condition,
            cohort: round.submissions.len(),
            fan_out: round.assignment.as_ref().map_or(0, |a| a.fan_out),
            tasks: round.tasks.len(),
            reviews: round.reviews.len(),
            expired: round.tasks.values().filter(|t| t.status == TaskStatus::Expired).count(),
            ratings: round.ratings.len(),
            messages: round.messages.values().map(Vec::len).sum(),
            usefulness: Summary::of(&stars),
            review_words: Summary::of(&words),
            thread_messages: Summary::of(&threads),
            assortativity: assort,
            released,
            grades,
        })
    }

    /// Aggregate grades that exist.
    pub fn aggregate_grades(&self) -> Vec<f64> {
        self.grades.values().flatten().map(|g| *g as f64).collect()
    }

    pub fn rows(&self) -> Vec<MetricRow> {
        let condition = self.condition.slug().to_string();
        let row = |metric: String, value: Option<f64>, n: usize| MetricRow {
            round: self.round,
            condition: condition.clone(),
            metric,
            value,
            n,
        };
        let count = |v: usize| Some(v as f64);
        let mut rows = vec![
            row("tasks".into(), count(self.tasks), self.cohort),
            row("reviews".into(), count(self.reviews), self.tasks),
            row("expired".into(), count(self.expired), self.tasks),
            row("ratings".into(), count(self.ratings), self.reviews),
            row("messages".into(), count(self.messages), self.reviews),
        ];
        for (name, s) in [
            ("usefulness", self.usefulness),
            ("review_words", self.review_words),
            ("thread_messages", self.thread_messages),
        ] {
            rows.push(row(format!("{name}_mean"), s.mean, s.n));
            rows.push(row(format!("{name}_std"), s.std, s.n));
        }
        rows.push(row("assortativity".into(), Some(self.assortativity.value), self.assortativity.authors));
        let gap = grade_gap(self).ok();
        rows.push(row("grade_gap".into(), gap, self.aggregate_grades().len()));
        for (p, g) in &self.grades {
            rows.push(row(format!("grade[{p}]"), g.map(|g| g as f64), usize::from(g.is_some())));
        }
        rows
    }
}

/// Spread between the 90th and 10th percentile of aggregate grades.
pub fn grade_gap(metrics: &RoundMetrics) -> Result<f64, StatsError> {
    if !metrics.released {
        return Err(StatsError::GradesNotReleased { round: metrics.round });
    }
    spread_90_10(&metrics.aggregate_grades())
}

/// One CSV line. Empty `value` means the metric is undefined for this round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub round: u32,
    pub condition: String,
    pub metric: String,
    pub value: Option<f64>,
    pub n: usize,
}

pub const CSV_HEADER: [&str; 5] = ["round", "condition", "metric", "value", "n"];

pub fn write_rows<W: Write>(rows: impl IntoIterator<Item = MetricRow>, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        let value = row.value.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([row.round.to_string(), row.condition, row.metric, value, row.n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(metrics: &[RoundMetrics], path: &Path) -> Result<(), SimError> {
    let io_failure = |source: std::io::Error| SimError::IoFailure { path: path.to_path_buf(), source };
    let file = std::fs::File::create(path).map_err(io_failure)?;
    write_rows(metrics.iter().flat_map(RoundMetrics::rows), std::io::BufWriter::new(file))
        .map_err(|e| io_failure(e.into()))
}
