use std::collections::{BTreeMap, BTreeSet};

use ipr_matching::{assign_reviewers, usefulness_score};
use serde::{Deserialize, Serialize};

use crate::command::Command;
use crate::error::{ApplyError, DomainError};
use crate::event::{DomainEvent, Event, UsefulnessSummary};
use crate::gating::lower_median;
use crate::ids::{CourseId, ParticipantId, ReviewId, RoundId, TaskId};
use crate::limits;
use crate::model::{
    CourseConfig, CourseRound, GradeReport, Message, Participant, Phase, Review, ReviewTask, Round, Submission,
    TaskStatus, UsefulnessEntry, UsefulnessRating,
};
use crate::Timestamp;

/// One course and every round it has run. `Course::default()` is the empty
/// course a log starts from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub id: CourseId,
    pub config: CourseConfig,
    pub created_at: Option<Timestamp>,
    pub participants: BTreeMap<ParticipantId, Participant>,
    pub rounds: BTreeMap<RoundId, Round>,
    /// Sequence number of the last applied event.
    pub last_seq: u64,
}

type Decision = Result<Vec<DomainEvent>, DomainError>;

impl Course {
    pub fn is_created(&self) -> bool {
        self.created_at.is_some()
    }

    pub fn participant(&self, id: &ParticipantId) -> Result<&Participant, DomainError> {
        self.participants.get(id).ok_or_else(|| DomainError::UnknownParticipant(id.to_string()))
    }

    pub fn round(&self, id: &RoundId) -> Result<&Round, DomainError> {
        self.rounds.get(id).ok_or_else(|| DomainError::UnknownRound(id.to_string()))
    }

    /// Round with the highest number, if any.
    pub fn latest_round(&self) -> Option<&Round> {
        self.rounds.values().max_by_key(|r| r.meta.number)
    }

    pub fn task(&self, id: &TaskId) -> Result<(&Round, &ReviewTask), DomainError> {
        let round = self.rounds.get(&id.round()).ok_or_else(|| DomainError::UnknownTask(id.to_string()))?;
        let task = round.tasks.get(id).ok_or_else(|| DomainError::UnknownTask(id.to_string()))?;
        Ok((round, task))
    }

    pub fn review(&self, id: &ReviewId) -> Result<(&Round, &Review), DomainError> {
        let round = self.rounds.get(&id.round()).ok_or_else(|| DomainError::UnknownReview(id.to_string()))?;
        let review = round.reviews.get(id).ok_or_else(|| DomainError::UnknownReview(id.to_string()))?;
        Ok((round, review))
    }

    // ---------------------------------------------------------------------
    // Commands
    // ---------------------------------------------------------------------

    /// Validates `command` and returns the events it would record, numbered
    /// after `last_seq`. State is untouched.
    pub fn decide(&self, command: &Command, now: Timestamp) -> Result<Vec<Event>, DomainError> {
        if !self.is_created() && !matches!(command, Command::CreateCourse { .. }) {
            return Err(DomainError::CourseNotCreated);
        }
        let changes = match command {
            Command::CreateCourse { course, config } => self.decide_create(course, config),
            Command::Enroll { display_name } => self.decide_enroll(display_name),
            Command::CreateRound { roster, deadlines } => self.decide_round(roster.as_deref(), deadlines, now),
            Command::SubmitAssignment { round, participant, content_ref } => {
                self.decide_submit(round, participant, content_ref, now)
            }
            Command::RecordIntro { participant, text } => self.decide_intro(participant, text),
            Command::AdvancePhase { round, target, force } => self.decide_advance(round, *target, *force),
            Command::SubmitReview { task, reviewer, prompts, grade } => {
                self.decide_review(task, reviewer, prompts, *grade, now)
            }
            Command::RateFeedback { review, rater, stars } => self.decide_rating(review, rater, *stars, now),
            Command::PostMessage { review, sender, body } => self.decide_message(review, sender, body, now),
        }?;
        Ok(changes
            .into_iter()
            .enumerate()
            .map(|(i, change)| Event { seq: self.last_seq + 1 + i as u64, ts: now, change })
            .collect())
    }

    /// Decides and applies in one step. For callers without a log.
    pub fn execute(&mut self, command: &Command, now: Timestamp) -> Result<Vec<Event>, DomainError> {
        let events = self.decide(command, now)?;
        for event in &events {
            self.apply(event).expect("freshly decided events always apply");
        }
        Ok(events)
    }

    fn decide_create(&self, course: &CourseId, config: &CourseConfig) -> Decision {
        if self.is_created() {
            return Err(DomainError::CourseExists);
        }
        if !CourseId::is_well_formed(course.as_str()) {
            return Err(DomainError::InvalidConfig(format!("malformed course id {course:?}")));
        }
        config.validate().map_err(DomainError::InvalidConfig)?;
        Ok(vec![DomainEvent::CourseCreated { course: course.clone(), config: config.clone() }])
    }

    fn decide_enroll(&self, display_name: &str) -> Decision {
        let len = display_name.trim().chars().count();
        if len == 0 || display_name.chars().count() > limits::DISPLAY_NAME_CHARS {
            return Err(DomainError::InvalidDisplayName { limit: limits::DISPLAY_NAME_CHARS });
        }
        let participant = self.id.participant(self.participants.len() + 1);
        Ok(vec![DomainEvent::ParticipantEnrolled { participant, display_name: display_name.to_string() }])
    }

    fn decide_round(
        &self,
        roster: Option<&[ParticipantId]>,
        deadlines: &BTreeMap<Phase, Timestamp>,
        now: Timestamp,
    ) -> Decision {
        if self.rounds.values().any(|r| r.phase() != Phase::Released) {
            return Err(DomainError::RoundInProgress);
        }
        let roster: BTreeSet<ParticipantId> = match roster {
            Some(ids) => {
                for id in ids {
                    self.participant(id)?;
                }
                ids.iter().cloned().collect()
            }
            None => self.participants.keys().cloned().collect(),
        };
        let number = self.rounds.len() as u32 + 1;
        let mut deadlines_merged = self.config.deadlines.clone();
        deadlines_merged.extend(deadlines.iter().map(|(k, v)| (*k, *v)));
        let round = CourseRound {
            round_id: self.id.round(number),
            number,
            condition: self.config.condition,
            phase: Phase::Submission,
            k: self.config.k,
            roster,
            deadlines: deadlines_merged,
            rng_seed: self.config.round_seed(number),
            created_at: now,
        };
        Ok(vec![DomainEvent::RoundCreated { round }])
    }

    fn decide_submit(
        &self,
        round_id: &RoundId,
        participant: &ParticipantId,
        content: &str,
        now: Timestamp,
    ) -> Decision {
        let round = self.round(round_id)?;
        if round.phase() != Phase::Submission {
            return Err(DomainError::PhaseClosed { phase: round.phase() });
        }
        if !round.meta.roster.contains(participant) {
            return Err(DomainError::UnknownParticipant(participant.to_string()));
        }
        if content.trim().is_empty() {
            return Err(DomainError::EmptyContent);
        }
        check_len(content, limits::CONTENT_REF_CHARS)?;
        Ok(vec![DomainEvent::SubmissionMade {
            submission: Submission {
                author: participant.clone(),
                round: round_id.clone(),
                content_ref: content.to_string(),
                submitted_at: now,
            },
        }])
    }

    fn decide_intro(&self, participant: &ParticipantId, text: &str) -> Decision {
        self.participant(participant)?;
        if self.config.condition.is_blind() {
            return Err(DomainError::BlindModeActive);
        }
        check_len(text, limits::INTRO_CHARS)?;
        Ok(vec![DomainEvent::IntroRecorded { participant: participant.clone(), intro: text.to_string() }])
    }

    fn decide_advance(&self, round_id: &RoundId, target: Phase, force: bool) -> Decision {
        let round = self.round(round_id)?;
        let from = round.phase();
        if from.next() != Some(target) {
            return Err(DomainError::IllegalTransition { from, to: target });
        }
        let advanced = |expired| DomainEvent::PhaseAdvanced { round: round_id.clone(), from, to: target, expired };
        match target {
            Phase::Reviewing => {
                let found = round.submissions.len();
                if found < 2 {
                    return Err(DomainError::InsufficientSubmissions { found });
                }
                let submitters: Vec<ParticipantId> = round.submissions.keys().cloned().collect();
                let scores: BTreeMap<ParticipantId, f64> =
                    submitters.iter().map(|p| (p.clone(), self.prior_usefulness(p, round.meta.number))).collect();
                let raw_ids: Vec<String> = submitters.iter().map(|p| p.as_str().to_string()).collect();
                let raw_scores: BTreeMap<String, f64> =
                    scores.iter().map(|(p, v)| (p.as_str().to_string(), *v)).collect();
                let assignment = assign_reviewers(
                    &raw_ids,
                    round.meta.condition.policy(),
                    round.meta.k,
                    &raw_scores,
                    round.meta.rng_seed,
                )?;
                let tasks = assignment
                    .pairs
                    .iter()
                    .enumerate()
                    .map(|(i, pair)| ReviewTask {
                        id: round_id.task(i + 1),
                        reviewer: ParticipantId::new(pair.reviewer.clone()),
                        author: ParticipantId::new(pair.author.clone()),
                        round: round_id.clone(),
                        status: TaskStatus::Pending,
                    })
                    .collect();
                Ok(vec![
                    advanced(Vec::new()),
                    DomainEvent::AssignmentCreated { round: round_id.clone(), assignment, scores, tasks },
                ])
            }
            Phase::Rating => {
                let pending: Vec<TaskId> = round.pending_tasks().map(|t| t.id.clone()).collect();
                if !pending.is_empty() && !force {
                    return Err(DomainError::IncompleteReviews { pending: pending.len() });
                }
                Ok(vec![advanced(pending)])
            }
            Phase::Released => {
                let mut per_reviewer: BTreeMap<&ParticipantId, Vec<u8>> = BTreeMap::new();
                for (review_id, rating) in &round.ratings {
                    if let Some(review) = round.reviews.get(review_id) {
                        per_reviewer.entry(&review.reviewer).or_default().push(rating.stars);
                    }
                }
                let usefulness = per_reviewer
                    .into_iter()
                    .map(|(p, stars)| {
                        let score = usefulness_score(p.as_str(), &stars);
                        UsefulnessSummary { participant: p.clone(), mean: score.value, ratings: score.n_ratings }
                    })
                    .collect();
                Ok(vec![advanced(Vec::new()), DomainEvent::GradesReleased { round: round_id.clone(), usefulness }])
            }
            Phase::Submission => unreachable!("submission has no predecessor"),
        }
    }

    fn decide_review(
        &self,
        task_id: &TaskId,
        reviewer: &ParticipantId,
        prompts: &[String],
        grade: i64,
        now: Timestamp,
    ) -> Decision {
        let (round, task) = self.task(task_id)?;
        if round.phase() != Phase::Reviewing {
            return Err(DomainError::PhaseClosed { phase: round.phase() });
        }
        if &task.reviewer != reviewer {
            return Err(DomainError::NotYourTask);
        }
        if task.status != TaskStatus::Pending {
            return Err(DomainError::TaskNotPending { status: task.status });
        }
        let prompts: [String; limits::PROMPTS] = prompts
            .to_vec()
            .try_into()
            .map_err(|v: Vec<String>| DomainError::WrongPromptCount { expected: limits::PROMPTS, actual: v.len() })?;
        for p in &prompts {
            check_len(p, limits::PROMPT_CHARS)?;
        }
        if prompts.iter().all(|p| p.trim().is_empty()) {
            return Err(DomainError::AllPromptsEmpty);
        }
        let (min, max) = (self.config.grade_min, self.config.grade_max);
        if !(min..=max).contains(&grade) {
            return Err(DomainError::GradeOutOfRange { grade, min, max });
        }
        Ok(vec![DomainEvent::ReviewSubmitted {
            review: Review {
                id: task_id.review_id(),
                task: task_id.clone(),
                round: round.id().clone(),
                reviewer: task.reviewer.clone(),
                author: task.author.clone(),
                prompts,
                grade,
                created_at: now,
            },
        }])
    }

    fn decide_rating(&self, review_id: &ReviewId, rater: &ParticipantId, stars: i64, now: Timestamp) -> Decision {
        let (round, review) = self.review(review_id)?;
        if round.phase() < Phase::Rating {
            return Err(DomainError::PhaseClosed { phase: round.phase() });
        }
        if &review.author != rater {
            return Err(DomainError::NotReceiver);
        }
        if !(1..=5).contains(&stars) {
            return Err(DomainError::StarsOutOfRange(stars));
        }
        if round.ratings.contains_key(review_id) {
            return Err(DomainError::AlreadyRated);
        }
        Ok(vec![DomainEvent::FeedbackRated {
            rating: UsefulnessRating {
                review: review_id.clone(),
                rater: rater.clone(),
                stars: stars as u8,
                rated_at: now,
            },
        }])
    }

    fn decide_message(&self, review_id: &ReviewId, sender: &ParticipantId, body: &str, now: Timestamp) -> Decision {
        let (round, review) = self.review(review_id)?;
        if sender != &review.reviewer && sender != &review.author {
            return Err(DomainError::NotAParty);
        }
        if round.phase() < Phase::Rating {
            return Err(DomainError::PhaseClosed { phase: round.phase() });
        }
        if body.trim().is_empty() {
            return Err(DomainError::EmptyBody);
        }
        check_len(body, limits::MESSAGE_CHARS)?;
        Ok(vec![DomainEvent::MessagePosted {
            message: Message {
                review: review_id.clone(),
                sender: sender.clone(),
                body: body.to_string(),
                sent_at: now,
            },
        }])
    }

    // ---------------------------------------------------------------------
    // Event application
    // ---------------------------------------------------------------------

    pub fn apply(&mut self, event: &Event) -> Result<(), ApplyError> {
        let expected = self.last_seq + 1;
        if event.seq != expected {
            return Err(ApplyError::SequenceGap { expected, actual: event.seq });
        }
        self.apply_change(&event.change, event.ts)?;
        self.last_seq = event.seq;
        Ok(())
    }

    fn round_mut(&mut self, id: &RoundId) -> Result<&mut Round, ApplyError> {
        self.rounds.get_mut(id).ok_or_else(|| ApplyError::Inconsistent(format!("unknown round {id}")))
    }

    fn apply_change(&mut self, change: &DomainEvent, ts: Timestamp) -> Result<(), ApplyError> {
        let inconsistent = |what: String| Err(ApplyError::Inconsistent(what));
        match change {
            DomainEvent::CourseCreated { course, config } => {
                if self.is_created() {
                    return inconsistent("course created twice".into());
                }
                self.id = course.clone();
                self.config = config.clone();
                self.created_at = Some(ts);
            }
            DomainEvent::ParticipantEnrolled { participant, display_name } => {
                if self.participants.contains_key(participant) {
                    return inconsistent(format!("{participant} enrolled twice"));
                }
                self.participants.insert(
                    participant.clone(),
                    Participant {
                        id: participant.clone(),
                        display_name: display_name.clone(),
                        intro: None,
                        usefulness_history: Vec::new(),
                    },
                );
            }
            DomainEvent::RoundCreated { round } => {
                if self.rounds.contains_key(&round.round_id) {
                    return inconsistent(format!("round {} created twice", round.round_id));
                }
                self.rounds.insert(round.round_id.clone(), Round::new(round.clone()));
            }
            DomainEvent::SubmissionMade { submission } => {
                let round = self.round_mut(&submission.round)?;
                round.submissions.insert(submission.author.clone(), submission.clone());
            }
            DomainEvent::IntroRecorded { participant, intro } => {
                let Some(p) = self.participants.get_mut(participant) else {
                    return inconsistent(format!("unknown participant {participant}"));
                };
                p.intro = Some(intro.clone());
            }
            DomainEvent::PhaseAdvanced { round, from, to, expired } => {
                let round = self.round_mut(round)?;
                if round.meta.phase != *from || from.next() != Some(*to) {
                    return inconsistent(format!("phase change {from} -> {to} from {}", round.meta.phase));
                }
                round.meta.phase = *to;
                for id in expired {
                    match round.tasks.get_mut(id) {
                        Some(task) => task.status = TaskStatus::Expired,
                        None => return inconsistent(format!("unknown task {id}")),
                    }
                }
            }
            DomainEvent::AssignmentCreated { round, assignment, scores, tasks } => {
                let round = self.round_mut(round)?;
                if round.assignment.is_some() {
                    return inconsistent(format!("round {} matched twice", round.meta.round_id));
                }
                round.assignment = Some(assignment.clone());
                round.matching_scores = scores.clone();
                round.tasks = tasks.iter().map(|t| (t.id.clone(), t.clone())).collect();
            }
            DomainEvent::ReviewSubmitted { review } => {
                let round = self.round_mut(&review.round)?;
                let Some(task) = round.tasks.get_mut(&review.task) else {
                    return inconsistent(format!("unknown task {}", review.task));
                };
                task.status = TaskStatus::Reviewed;
                round.reviews.insert(review.id.clone(), review.clone());
            }
            DomainEvent::FeedbackRated { rating } => {
                let round = self.round_mut(&rating.review.round())?;
                let Some(task) = round.tasks.get_mut(&rating.review.task_id()) else {
                    return inconsistent(format!("unknown review {}", rating.review));
                };
                task.status = TaskStatus::Rated;
                if round.ratings.insert(rating.review.clone(), rating.clone()).is_some() {
                    return inconsistent(format!("review {} rated twice", rating.review));
                }
            }
            DomainEvent::MessagePosted { message } => {
                let round = self.round_mut(&message.review.round())?;
                round.messages.entry(message.review.clone()).or_default().push(message.clone());
            }
            DomainEvent::GradesReleased { round, usefulness } => {
                self.round_mut(round)?.released_at = Some(ts);
                for summary in usefulness {
                    let Some(p) = self.participants.get_mut(&summary.participant) else {
                        return inconsistent(format!("unknown participant {}", summary.participant));
                    };
                    p.usefulness_history.push(UsefulnessEntry {
                        round: round.clone(),
                        mean: summary.mean,
                        ratings: summary.ratings,
                    });
                }
            }
        }
        Ok(())
    }

    // ---------------------------------------------------------------------
    // Queries
    // ---------------------------------------------------------------------

    /// Stars received on reviews `participant` wrote in rounds numbered
    /// below `before_round`.
    pub fn prior_stars(&self, participant: &ParticipantId, before_round: u32) -> Vec<u8> {
        self.rounds
            .values()
            .filter(|r| r.meta.number < before_round)
            .flat_map(|r| {
                r.reviews_written(participant).filter_map(move |review| r.ratings.get(&review.id).map(|x| x.stars))
            })
            .collect()
    }

    pub fn prior_usefulness(&self, participant: &ParticipantId, before_round: u32) -> f64 {
        usefulness_score(participant.as_str(), &self.prior_stars(participant, before_round)).value
    }

    /// Whether `participant` may see the grades written about them in `round`.
    pub fn grades_visible(&self, round_id: &RoundId, participant: &ParticipantId) -> Result<bool, DomainError> {
        let round = self.round(round_id)?;
        Ok(Self::visible_in(round, participant))
    }

    pub(crate) fn visible_in(round: &Round, participant: &ParticipantId) -> bool {
        round.phase() >= Phase::Rating
            && round
                .reviews_received(participant)
                .all(|review| round.ratings.get(&review.id).is_some_and(|rating| &rating.rater == participant))
    }

    pub fn grade_report(&self, round_id: &RoundId, participant: &ParticipantId) -> Result<GradeReport, DomainError> {
        let round = self.round(round_id)?;
        self.participant(participant)?;
        if !Self::visible_in(round, participant) {
            return Err(DomainError::GradesPending);
        }
        let per_review_grades: Vec<i64> = round.reviews_received(participant).map(|r| r.grade).collect();
        Ok(GradeReport {
            participant: participant.clone(),
            round: round_id.clone(),
            aggregate: lower_median(&per_review_grades),
            per_review_grades,
        })
    }
}

fn check_len(text: &str, limit: usize) -> Result<(), DomainError> {
    let actual = text.chars().count();
    if actual > limit {
        return Err(DomainError::TooLong { limit, actual });
    }
    Ok(())
}
