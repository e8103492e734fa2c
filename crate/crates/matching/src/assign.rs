use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::score::COLD_START_SCORE;
use crate::MatchingError;

/// How the submitter ring is ordered before reviewers are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Random,
    Incentive,
}

/// A directed reviewer -> author edge.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub reviewer: String,
    pub author: String,
}

/// Reviewer assignment for one round.
///
/// `ring` is the order the constructor used; the author at ring position `j`
/// is reviewed by positions `j+1 ..= j+fan_out` (mod n). `pairs` lists edges
/// author by author in ring order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSet {
    pub policy: Policy,
    pub seed: u64,
    pub fan_out: usize,
    pub ring: Vec<String>,
    pub pairs: Vec<Pair>,
}

impl AssignmentSet {
    /// Reviewers of `author`, nearest ring neighbour first.
    pub fn reviewers_of(&self, author: &str) -> Vec<&str> {
        self.pairs.iter().filter(|p| p.author == author).map(|p| p.reviewer.as_str()).collect()
    }

    /// Authors whose reviewer block runs past the end of the ring.
    pub fn wrap_positions(&self) -> &[String] {
        let n = self.ring.len();
        &self.ring[n.saturating_sub(self.fan_out)..]
    }
}

/// `min(k, n - 1)`.
pub fn effective_fan_out(k: usize, n: usize) -> usize {
    k.min(n.saturating_sub(1))
}

/// Seeded tie-break key. Stable across platforms and toolchains.
pub fn tie_break_key(participant: &str, seed: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(participant.as_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Builds the reviewer assignment for one round.
///
/// Submitters are canonicalised (sorted) first, so the result depends only on
/// the set of submitters, not the order they were passed in. Participants
/// missing from `scores` are treated as unrated.
pub fn assign_reviewers(
    submitters: &[String],
    policy: Policy,
    k: usize,
    scores: &BTreeMap<String, f64>,
    seed: u64,
) -> Result<AssignmentSet, MatchingError> {
    if k == 0 {
        return Err(MatchingError::ZeroFanOut);
    }
    let mut ring: Vec<String> = submitters.to_vec();
    ring.sort();
    if let Some(w) = ring.windows(2).find(|w| w[0] == w[1]) {
        return Err(MatchingError::DuplicateSubmitter(w[0].clone()));
    }
    let n = ring.len();
    if n < 2 {
        return Err(MatchingError::TooFewSubmitters(n));
    }

    match policy {
        Policy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ring.shuffle(&mut rng);
        }
        Policy::Incentive => {
            let score = |id: &String| scores.get(id).copied().unwrap_or(COLD_START_SCORE);
            ring.sort_by_cached_key(|id| (std::cmp::Reverse(OrdF64(score(id))), tie_break_key(id, seed)));
        }
    }

    let d = effective_fan_out(k, n);
    let mut pairs = Vec::with_capacity(n * d);
    for (j, author) in ring.iter().enumerate() {
        for offset in 1..=d {
            pairs.push(Pair { reviewer: ring[(j + offset) % n].clone(), author: author.clone() });
        }
    }

    Ok(AssignmentSet { policy, seed, fan_out: d, ring, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
