//! Descriptive statistics and the pooled two-sample t-test.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("pooled variance is zero")]
    ZeroVariance,
    #[error("grades for round {round} have not been released")]
    GradesNotReleased { round: u32 },
    #[error("percentile {0} outside (0, 100]")]
    BadPercentile(f64),
}

fn need(xs: &[f64], n: usize) -> Result<(), StatsError> {
    if xs.len() < n {
        return Err(StatsError::TooFewSamples { needed: n, found: xs.len() });
    }
    Ok(())
}

pub fn mean(xs: &[f64]) -> Result<f64, StatsError> {
    need(xs, 1)?;
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample variance (n - 1 denominator), two-pass.
pub fn variance(xs: &[f64]) -> Result<f64, StatsError> {
    need(xs, 2)?;
    let m = mean(xs)?;
    Ok(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64)
}

/// Sample standard deviation (n - 1 denominator).
pub fn std_dev(xs: &[f64]) -> Result<f64, StatsError> {
    variance(xs).map(f64::sqrt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: usize,
    /// Two-sided.
    pub p: f64,
}

/// Student's t-test for two independent samples assuming equal variances.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    need(a, 2)?;
    need(b, 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = a.len() + b.len() - 2;
    let pooled = ((na - 1.0) * variance(a)? + (nb - 1.0) * variance(b)?) / df as f64;
    if pooled <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let t = (mean(a)? - mean(b)?) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    Ok(TTest { t, df, p: two_sided_p(t, df as f64) })
}

/// P(|T| >= |t|) for T ~ t(df), via the regularised incomplete beta function.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Nearest-rank percentile: the smallest value with at least `pct`% of the
/// sample at or below it.
pub fn percentile(xs: &[f64], pct: f64) -> Result<f64, StatsError> {
    need(xs, 1)?;
    if !(pct > 0.0 && pct <= 100.0) {
        return Err(StatsError::BadPercentile(pct));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// 90th minus 10th percentile.
pub fn spread_90_10(xs: &[f64]) -> Result<f64, StatsError> {
    Ok(percentile(xs, 90.0)? - percentile(xs, 10.0)?)
}

/// Mean, standard deviation and sample size in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Self { n: xs.len(), mean: mean(xs).ok(), std: std_dev(xs).ok() }
    }
}
