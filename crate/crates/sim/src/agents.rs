//! Synthetic students and the population file that describes them.

use std::collections::BTreeMap;

use ipr_core::Condition;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::SimError;

/// One simulated student. Probabilities are in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub latent_quality: f64,
    /// Chance of finishing each review before the reviewing phase closes.
    #[serde(default = "one")]
    pub diligence: f64,
    /// Chance of posting in a review thread, by condition.
    #[serde(default)]
    pub message_propensity: BTreeMap<Condition, f64>,
    #[serde(default)]
    pub rating_noise_sd: f64,
}

fn one() -> f64 {
    1.0
}

impl AgentProfile {
    pub fn validate(&self) -> Result<(), SimError> {
        unit("latent_quality", self.latent_quality)?;
        unit("diligence", self.diligence)?;
        for (c, p) in &self.message_propensity {
            unit(&format!("message_propensity.{c}"), *p)?;
        }
        non_negative("rating_noise_sd", self.rating_noise_sd)
    }

    pub fn propensity(&self, condition: Condition) -> f64 {
        self.message_propensity.get(&condition).copied().unwrap_or(0.0)
    }
}

fn unit(name: &str, v: f64) -> Result<(), SimError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::ConfigInvalid(format!("{name} = {v} is outside [0, 1]")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), SimError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::ConfigInvalid(format!("{name} = {v} must be a finite value >= 0")))
    }
}

/// How latent quality is drawn when agents are not listed explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QualityDist {
    Uniform { low: f64, high: f64 },
    Beta { alpha: f64, beta: f64 },
    Fixed { value: f64 },
}

impl Default for QualityDist {
    fn default() -> Self {
        QualityDist::Uniform { low: 0.0, high: 1.0 }
    }
}

impl QualityDist {
    fn validate(&self) -> Result<(), SimError> {
        match *self {
            QualityDist::Uniform { low, high } => {
                unit("quality.low", low)?;
                unit("quality.high", high)?;
                if low > high {
                    return Err(SimError::ConfigInvalid("quality.low exceeds quality.high".into()));
                }
                Ok(())
            }
            QualityDist::Beta { alpha, beta } => {
                if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    Err(SimError::ConfigInvalid("beta parameters must be positive".into()))
                }
            }
            QualityDist::Fixed { value } => unit("quality.value", value),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            QualityDist::Uniform { low, high } if low == high => low,
            QualityDist::Uniform { low, high } => rng.random_range(low..=high),
            QualityDist::Beta { alpha, beta } => Beta::new(alpha, beta).map(|d| d.sample(rng)).unwrap_or(0.5),
            QualityDist::Fixed { value } => value,
        }
    }
}

/// Condition-dependent behaviour shared by the whole cohort. These stand in
/// for effects observed in people; the simulation takes them as inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionEffect {
    /// Added to every usefulness rating before rounding.
    pub rating_shift: f64,
    /// Mean words per review for an agent of quality 0.5.
    pub review_words: f64,
    pub message_propensity: f64,
}

impl Default for ConditionEffect {
    fn default() -> Self {
        Self { rating_shift: 0.0, review_words: 80.0, message_propensity: 0.3 }
    }
}

/// Contents of an `--agents` file. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Population {
    /// Explicit cohort. When non-empty its length must equal the cohort size.
    pub agents: Vec<AgentProfile>,
    pub quality: QualityDist,
    pub diligence: f64,
    pub rating_noise_sd: f64,
    /// Standard deviation of reviewer grades around the author's quality.
    pub grade_noise_sd: f64,
    pub effects: BTreeMap<Condition, ConditionEffect>,
    /// Per-round quality gain from good reviewers: q += rate * mean(q of reviewers) * (1 - q).
    pub learning_rate: f64,
}

impl Default for Population {
    fn default() -> Self {
        let blind = ConditionEffect { rating_shift: -0.5, review_words: 60.0, message_propensity: 0.15 };
        let identified = ConditionEffect::default();
        Self {
            agents: Vec::new(),
            quality: QualityDist::default(),
            diligence: 1.0,
            rating_noise_sd: 0.5,
            grade_noise_sd: 5.0,
            effects: BTreeMap::from([
                (Condition::BlindRandom, blind),
                (Condition::IdentifiedRandom, identified.clone()),
                (Condition::IdentifiedIncentive, identified),
            ]),
            learning_rate: 0.0,
        }
    }
}

impl Population {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let pop: Population =
            serde_json::from_str(text).map_err(|e| SimError::ConfigInvalid(format!("agents file: {e}")))?;
        pop.validate()?;
        Ok(pop)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.quality.validate()?;
        unit("diligence", self.diligence)?;
        non_negative("rating_noise_sd", self.rating_noise_sd)?;
        non_negative("grade_noise_sd", self.grade_noise_sd)?;
        non_negative("learning_rate", self.learning_rate)?;
        for (c, e) in &self.effects {
            unit(&format!("effects.{c}.message_propensity"), e.message_propensity)?;
            non_negative(&format!("effects.{c}.review_words"), e.review_words)?;
            if !e.rating_shift.is_finite() {
                return Err(SimError::ConfigInvalid(format!("effects.{c}.rating_shift must be finite")));
            }
        }
        self.agents.iter().try_for_each(AgentProfile::validate)
    }

    pub fn effect(&self, condition: Condition) -> ConditionEffect {
        self.effects.get(&condition).cloned().unwrap_or_default()
    }

    /// The cohort for one run. Drawn agents take their quality from `rng`
    /// in slot order, so the same seed gives the same cohort in every
    /// condition.
    pub fn cohort(&self, size: usize, rng: &mut ChaCha8Rng) -> Result<Vec<AgentProfile>, SimError> {
        if !self.agents.is_empty() {
            if self.agents.len() != size {
                return Err(SimError::ConfigInvalid(format!(
                    "agents file lists {} agents but the cohort size is {size}",
                    self.agents.len()
                )));
            }
            return Ok(self.agents.clone());
        }
        let propensity = self.effects.iter().map(|(c, e)| (*c, e.message_propensity)).collect::<BTreeMap<_, _>>();
        Ok((0..size)
            .map(|_| AgentProfile {
                latent_quality: self.quality.draw(rng),
                diligence: self.diligence,
                message_propensity: propensity.clone(),
                rating_noise_sd: self.rating_noise_sd,
            })
            .collect())
    }
}
