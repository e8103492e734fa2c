use serde::{Deserialize, Serialize};

/// Score assigned to participants who have not been rated yet.
pub const COLD_START_SCORE: f64 = 3.0;

/// Mean usefulness rating a participant received on reviews they wrote in
/// earlier rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessScore {
    pub participant: String,
    pub value: f64,
    pub n_ratings: usize,
}

/// Averages the stars a participant's reviews received. Stars outside 1..=5
/// are clamped into range before averaging.
pub fn usefulness_score(participant: impl Into<String>, stars: &[u8]) -> UsefulnessScore {
    let participant = participant.into();
    if stars.is_empty() {
        return UsefulnessScore { participant, value: COLD_START_SCORE, n_ratings: 0 };
    }
    let total: u64 = stars.iter().map(|&s| u64::from(s.clamp(1, 5))).sum();
    UsefulnessScore { participant, value: total as f64 / stars.len() as f64, n_ratings: stars.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_history_is_cold_start() {
        let s = usefulness_score("a", &[]);
        assert_eq!(s.value, 3.0);
        assert_eq!(s.n_ratings, 0);
    }

    #[test]
    fn mean_of_stars() {
        let s = usefulness_score("a", &[5, 4, 3]);
        assert_eq!(s.value, 4.0);
        assert_eq!(s.n_ratings, 3);

        let s = usefulness_score("b", &[1; 6]);
        assert_eq!(s.value, 1.0);
        assert_eq!(s.n_ratings, 6);
    }
}
