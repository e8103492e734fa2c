use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assign::AssignmentSet;
use crate::MatchingError;

/// Which authors contribute to the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Drop the `fan_out` authors at the end of the ring, whose reviewer
    /// block wraps back to the ring's head. Falls back to every author when
    /// fewer than two would remain.
    #[default]
    ExcludeWrap,
    AllAuthors,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assortativity {
    /// Spearman correlation in [-1, 1]; 0 when `degenerate`.
    pub value: f64,
    /// Ranks had no variation on at least one side.
    pub degenerate: bool,
    pub authors: usize,
}

/// Spearman rank correlation between each author's score and the mean score
/// of that author's reviewers, over authors outside the ring wrap.
pub fn assortativity(set: &AssignmentSet, scores: &BTreeMap<String, f64>) -> Result<Assortativity, MatchingError> {
    assortativity_with(set, scores, Scope::default())
}

pub fn assortativity_with(
    set: &AssignmentSet,
    scores: &BTreeMap<String, f64>,
    scope: Scope,
) -> Result<Assortativity, MatchingError> {
    let lookup = |id: &str| scores.get(id).copied().ok_or_else(|| MatchingError::MissingScore(id.to_string()));

    let n = set.ring.len();
    let keep = match scope {
        Scope::ExcludeWrap if n.saturating_sub(set.fan_out) >= 2 => n - set.fan_out,
        _ => n,
    };

    let mut reviewer_sum: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for pair in &set.pairs {
        let s = lookup(&pair.reviewer)?;
        let entry = reviewer_sum.entry(pair.author.as_str()).or_insert((0.0, 0));
        entry.0 += s;
        entry.1 += 1;
    }

    let mut own = Vec::with_capacity(keep);
    let mut theirs = Vec::with_capacity(keep);
    for author in &set.ring[..keep] {
        let Some(&(sum, count)) = reviewer_sum.get(author.as_str()) else { continue };
        own.push(lookup(author)?);
        theirs.push(sum / count as f64);
    }

    let authors = own.len();
    Ok(match spearman(&own, &theirs) {
        Some(value) => Assortativity { value, degenerate: false, authors },
        None => Assortativity { value: 0.0, degenerate: true, authors },
    })
}

/// Spearman's rho with average ranks for ties. `None` when either side has
/// no rank variation or the inputs are shorter than two.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len(), "spearman inputs must have equal length");
    if xs.len() < 2 {
        return None;
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assign::{assign_reviewers, Policy};

    // Reference values from scipy.stats.spearmanr.
    #[test]
    fn spearman_matches_reference() {
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[5.0, 6.0, 7.0, 8.0, 7.0]).unwrap();
        assert!((rho - 0.8207826816681233).abs() < 1e-12);
        let rho = spearman(&[3.0, 1.5, 4.0, 4.0, 2.0, 5.0], &[2.0, 1.0, 3.5, 3.0, 3.0, 4.5]).unwrap();
        assert!((rho - 0.8676470588235294).abs() < 1e-12);
        let rho = spearman(&[10.0, 20.0, 30.0, 40.0], &[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert!((rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_without_ties_matches_rank_difference_formula() {
        let xs = [0.3, 1.7, -2.0, 4.4, 0.9, 2.5, 3.1];
        let ys = [1.0, 0.2, -1.0, 3.0, 2.2, 2.1, 5.0];
        let rank =
            |v: &[f64]| -> Vec<f64> { v.iter().map(|a| 1.0 + v.iter().filter(|b| *b < a).count() as f64).collect() };
        let (rx, ry) = (rank(&xs), rank(&ys));
        let n = xs.len() as f64;
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
        let expected = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
        assert!((spearman(&xs, &ys).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn equal_scores_are_degenerate() {
        let people: Vec<String> = (0..8).map(|i| format!("p{i}")).collect();
        let scores: BTreeMap<String, f64> = people.iter().map(|p| (p.clone(), 3.0)).collect();
        let set = assign_reviewers(&people, Policy::Incentive, 3, &scores, 5).unwrap();
        let a = assortativity(&set, &scores).unwrap();
        assert!(a.degenerate);
        assert_eq!(a.value, 0.0);
    }

    #[test]
    fn missing_score_is_an_error() {
        let people: Vec<String> = (0..4).map(|i| format!("p{i}")).collect();
        let set = assign_reviewers(&people, Policy::Random, 1, &BTreeMap::new(), 5).unwrap();
        let err = assortativity(&set, &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, MatchingError::MissingScore(_)));
    }

    #[test]
    fn incentive_outside_wrap_is_perfectly_assortative() {
        let people: Vec<String> = (0..30).map(|i| format!("p{i:02}")).collect();
        let scores: BTreeMap<String, f64> =
            people.iter().enumerate().map(|(i, p)| (p.clone(), 1.0 + i as f64 * 0.13)).collect();
        let set = assign_reviewers(&people, Policy::Incentive, 3, &scores, 11).unwrap();
        let a = assortativity(&set, &scores).unwrap();
        assert_eq!(a.authors, 27);
        assert!((a.value - 1.0).abs() < 1e-12);
        // The wrapped authors pull the all-author correlation well below 1.
        let all = assortativity_with(&set, &scores, Scope::AllAuthors).unwrap();
        assert!(all.value < 0.8);
    }
}
