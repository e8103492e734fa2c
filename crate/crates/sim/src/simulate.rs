//! Runs synthetic cohorts through the real course workflow.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use ipr_core::{word_count, Command, Condition, Course, CourseConfig, CourseId, ParticipantId, Phase, Review, RoundId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::agents::{AgentProfile, Population};
use crate::metrics::RoundMetrics;
use crate::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub cohort: usize,
    pub rounds: u32,
    pub condition: Condition,
    pub seed: u64,
    pub k: usize,
    pub population: Population,
}

impl SimConfig {
    pub fn new(cohort: usize, rounds: u32, condition: Condition, seed: u64) -> Self {
        Self { cohort, rounds, condition, seed, k: 3, population: Population::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.cohort < 2 {
            return Err(SimError::ConfigInvalid(format!("cohort must be at least 2, got {}", self.cohort)));
        }
        if self.rounds == 0 {
            return Err(SimError::ConfigInvalid("rounds must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(SimError::ConfigInvalid("k must be at least 1".into()));
        }
        if self.cohort > u32::MAX as usize {
            return Err(SimError::ConfigInvalid("cohort too large".into()));
        }
        self.population.validate()
    }
}

/// Independent random streams. Every draw is keyed by what it is for and by
/// the agent slot it belongs to, never by who the agent was paired with, so
/// conditions that differ only in matching see identical behaviour.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Cohort = 0,
    Diligence = 1,
    Words = 2,
    Grades = 3,
    RatingNoise = 4,
    AuthorMessages = 5,
    ReviewerMessages = 6,
}

fn stream(seed: u64, round: u32, slot: usize, kind: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(round) << 40) | ((slot as u64) << 8) | kind as u64);
    rng
}

pub const COURSE_ID: &str = "sim";

/// A simulation in progress. [`run_simulation`] is the one-call form.
pub struct Simulation {
    config: SimConfig,
    agents: Vec<AgentProfile>,
    course: Course,
    clock: DateTime<Utc>,
    metrics: Vec<RoundMetrics>,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let agents = config.population.cohort(config.cohort, &mut stream(config.seed, 0, 0, Stream::Cohort))?;
        let clock = DateTime::parse_from_rfc3339("2025-09-01T09:00:00Z").expect("valid literal").with_timezone(&Utc);
        let mut sim = Self { config, agents, course: Course::default(), clock, metrics: Vec::new() };
        let course_config = CourseConfig {
            condition: sim.config.condition,
            k: sim.config.k,
            seed: sim.config.seed,
            ..CourseConfig::default()
        };
        sim.exec(Command::CreateCourse { course: CourseId::new(COURSE_ID), config: course_config })?;
        for slot in 0..sim.agents.len() {
            sim.exec(Command::Enroll { display_name: format!("Agent {}", slot + 1) })?;
        }
        Ok(sim)
    }

    pub fn course(&self) -> &Course {
        &self.course
    }

    pub fn agents(&self) -> &[AgentProfile] {
        &self.agents
    }

    pub fn metrics(&self) -> &[RoundMetrics] {
        &self.metrics
    }

    fn exec(&mut self, command: Command) -> Result<(), SimError> {
        self.clock += Duration::seconds(1);
        self.course.execute(&command, self.clock)?;
        Ok(())
    }

    fn id(&self, slot: usize) -> ParticipantId {
        ParticipantId::new(format!("{COURSE_ID}.p{}", slot + 1))
    }

    fn slot(&self, id: &ParticipantId) -> usize {
        id.as_str().rsplit_once(".p").and_then(|(_, n)| n.parse::<usize>().ok()).map_or(0, |n| n - 1)
    }

    pub fn run(mut self) -> Result<Vec<RoundMetrics>, SimError> {
        for _ in 0..self.config.rounds {
            self.step()?;
        }
        Ok(self.metrics)
    }

    /// Plays one full round and records its metrics.
    pub fn step(&mut self) -> Result<&RoundMetrics, SimError> {
        let number = self.metrics.len() as u32 + 1;
        let round = RoundId::new(format!("{COURSE_ID}.r{number}"));
        let seed = self.config.seed;
        let effect = self.config.population.effect(self.config.condition);
        let grade_noise = self.config.population.grade_noise_sd;
        let n = self.agents.len();

        self.exec(Command::CreateRound { roster: None, deadlines: BTreeMap::new() })?;
        for slot in 0..n {
            let participant = self.id(slot);
            self.exec(Command::SubmitAssignment {
                round: round.clone(),
                participant,
                content_ref: format!("agent {} round {number}", slot + 1),
            })?;
        }
        self.exec(Command::AdvancePhase { round: round.clone(), target: Phase::Reviewing, force: false })?;

        // Grades an author receives come from the author's own stream.
        let grades_for: Vec<Vec<i64>> = (0..n)
            .map(|slot| {
                let mut rng = stream(seed, number, slot, Stream::Grades);
                let q = self.agents[slot].latent_quality;
                (0..self.config.k)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        let raw = 100.0 * q + grade_noise * z;
                        (raw.round() as i64).clamp(0, 100)
                    })
                    .collect()
            })
            .collect();

        let tasks = self.course.round(&round)?.tasks.clone();
        let mut received_index: BTreeMap<ParticipantId, usize> = BTreeMap::new();
        let mut by_reviewer: BTreeMap<ParticipantId, Vec<_>> = BTreeMap::new();
        for task in tasks.values() {
            by_reviewer.entry(task.reviewer.clone()).or_default().push(task.clone());
        }
        let mut reviews = Vec::new();
        for (reviewer, list) in &by_reviewer {
            let slot = self.slot(reviewer);
            let agent = &self.agents[slot];
            let mut diligence = stream(seed, number, slot, Stream::Diligence);
            let mut words = stream(seed, number, slot, Stream::Words);
            let mean_words = effect.review_words * (0.5 + agent.latent_quality);
            let spread =
                Normal::new(mean_words, mean_words * 0.25).map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
            for task in list {
                let on_time = diligence.random::<f64>() < agent.diligence;
                let total = spread.sample(&mut words).round().max(1.0) as usize;
                let author_slot = self.slot(&task.author);
                let idx = received_index.entry(task.author.clone()).or_insert(0);
                let grade = grades_for[author_slot][*idx % grades_for[author_slot].len()];
                *idx += 1;
                if on_time {
                    reviews.push(Command::SubmitReview {
                        task: task.id.clone(),
                        reviewer: reviewer.clone(),
                        prompts: prompts_with(total),
                        grade,
                    });
                }
            }
        }
        for command in reviews {
            self.exec(command)?;
        }
        self.exec(Command::AdvancePhase { round: round.clone(), target: Phase::Rating, force: true })?;

        // Rating noise belongs to the reviewer's stream so the set of
        // ratings a reviewer earns does not depend on who they reviewed.
        let written: Vec<Review> = self.course.round(&round)?.reviews.values().cloned().collect();
        let mut noise: BTreeMap<usize, ChaCha8Rng> = BTreeMap::new();
        let mut reviewer_talk: BTreeMap<usize, ChaCha8Rng> = BTreeMap::new();
        let mut author_talk: BTreeMap<usize, ChaCha8Rng> = BTreeMap::new();
        let mut commands = Vec::new();
        for review in &written {
            let r_slot = self.slot(&review.reviewer);
            let a_slot = self.slot(&review.author);
            let z: f64 = StandardNormal
                .sample(noise.entry(r_slot).or_insert_with(|| stream(seed, number, r_slot, Stream::RatingNoise)));
            let rater = &self.agents[a_slot];
            let q = self.agents[r_slot].latent_quality;
            let stars =
                (1.0 + 4.0 * q + effect.rating_shift + rater.rating_noise_sd * z).round().clamp(1.0, 5.0) as i64;
            let condition = self.config.condition;
            let author_posts = author_talk
                .entry(a_slot)
                .or_insert_with(|| stream(seed, number, a_slot, Stream::AuthorMessages))
                .random::<f64>()
                < rater.propensity(condition);
            let reviewer_posts = reviewer_talk
                .entry(r_slot)
                .or_insert_with(|| stream(seed, number, r_slot, Stream::ReviewerMessages))
                .random::<f64>()
                < self.agents[r_slot].propensity(condition);
            if author_posts {
                commands.push(Command::PostMessage {
                    review: review.id.clone(),
                    sender: review.author.clone(),
                    body: "Could you say more about this?".into(),
                });
            }
            if reviewer_posts {
                commands.push(Command::PostMessage {
                    review: review.id.clone(),
                    sender: review.reviewer.clone(),
                    body: "Happy to explain if anything is unclear.".into(),
                });
            }
            commands.push(Command::RateFeedback { review: review.id.clone(), rater: review.author.clone(), stars });
        }
        for command in commands {
            self.exec(command)?;
        }
        self.exec(Command::AdvancePhase { round: round.clone(), target: Phase::Released, force: false })?;

        self.learn(&round)?;
        let metrics = RoundMetrics::collect(&self.course, &round)?;
        self.metrics.push(metrics);
        Ok(self.metrics.last().expect("just pushed"))
    }

    /// Authors improve in proportion to the quality of the reviewers they had.
    fn learn(&mut self, round: &RoundId) -> Result<(), SimError> {
        let rate = self.config.population.learning_rate;
        if rate == 0.0 {
            return Ok(());
        }
        let r = self.course.round(round)?;
        let mut helpers: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for review in r.reviews.values() {
            let q = self.agents[self.slot(&review.reviewer)].latent_quality;
            helpers.entry(self.slot(&review.author)).or_default().push(q);
        }
        for (slot, qs) in helpers {
            let help = qs.iter().sum::<f64>() / qs.len() as f64;
            let agent = &mut self.agents[slot];
            agent.latent_quality = (agent.latent_quality + rate * help * (1.0 - agent.latent_quality)).clamp(0.0, 1.0);
        }
        Ok(())
    }
}

/// Four prompts carrying `total` words between them.
fn prompts_with(total: usize) -> Vec<String> {
    let total = total.clamp(1, 4 * 600);
    (0..4)
        .map(|i| {
            let share = total / 4 + usize::from(i < total % 4);
            vec!["word"; share].join(" ")
        })
        .collect()
}

/// Total words across a review's prompts.
pub fn review_words(review: &Review) -> usize {
    review.prompts.iter().map(|p| word_count(p)).sum()
}

pub fn run_simulation(config: SimConfig) -> Result<Vec<RoundMetrics>, SimError> {
    Simulation::new(config)?.run()
}
