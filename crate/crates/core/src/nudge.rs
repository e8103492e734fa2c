/// Shown under feedback fields that look too thin to act on.
pub const ACTIONABILITY_NUDGE: &str = "Quick check: Is your feedback actionable?";

pub const DEFAULT_NUDGE_THRESHOLD: usize = 15;

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Returns the nudge when `text` has fewer than `threshold` words.
pub fn actionability_nudge(text: &str, threshold: usize) -> Option<&'static str> {
    (word_count(text) < threshold).then_some(ACTIONABILITY_NUDGE)
}
