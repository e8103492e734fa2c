use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::assign::{effective_fan_out, Pair};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SelfPair { participant: String },
    DuplicatePair { reviewer: String, author: String },
    OutDegree { participant: String, expected: usize, actual: usize },
    InDegree { participant: String, expected: usize, actual: usize },
    UnknownEndpoint { participant: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub expected_degree: usize,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a set of pairs against the fan-out contract without looking at how
/// it was built.
pub fn validate_assignment(pairs: &[Pair], submitters: &[String], k: usize) -> ValidityReport {
    let mut members: Vec<&str> = submitters.iter().map(String::as_str).collect();
    members.sort_unstable();
    members.dedup();
    let index: HashMap<&str, usize> = members.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let expected = effective_fan_out(k, members.len());
    let mut violations = Vec::new();

    let mut out_deg = vec![0usize; members.len()];
    let mut in_deg = vec![0usize; members.len()];
    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(pairs.len());
    let mut unknown = BTreeSet::new();

    for (i, pair) in pairs.iter().enumerate() {
        if pair.reviewer == pair.author {
            violations.push(Violation::SelfPair { participant: pair.reviewer.clone() });
        }
        let reviewer = index.get(pair.reviewer.as_str()).copied();
        let author = index.get(pair.author.as_str()).copied();
        match (reviewer, author) {
            (Some(r), Some(a)) => {
                out_deg[r] += 1;
                in_deg[a] += 1;
                edges.push((r, a, i));
            }
            _ => {
                if let Some(r) = reviewer {
                    out_deg[r] += 1;
                } else {
                    unknown.insert(pair.reviewer.as_str());
                }
                if let Some(a) = author {
                    in_deg[a] += 1;
                } else {
                    unknown.insert(pair.author.as_str());
                }
            }
        }
    }

    edges.sort_unstable();
    for w in edges.windows(2) {
        if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
            let pair = &pairs[w[1].2];
            violations.push(Violation::DuplicatePair { reviewer: pair.reviewer.clone(), author: pair.author.clone() });
        }
    }

    violations.extend(unknown.into_iter().map(|p| Violation::UnknownEndpoint { participant: p.to_string() }));
    for (m, &actual) in members.iter().zip(&out_deg) {
        if actual != expected {
            violations.push(Violation::OutDegree { participant: m.to_string(), expected, actual });
        }
    }
    for (m, &actual) in members.iter().zip(&in_deg) {
        if actual != expected {
            violations.push(Violation::InDegree { participant: m.to_string(), expected, actual });
        }
    }

    ValidityReport { expected_degree: expected, violations }
}
