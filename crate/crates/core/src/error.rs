use ipr_matching::MatchingError;

use crate::model::{Phase, TaskStatus};

/// Rejections produced while validating a command. Nothing is recorded when
/// one of these is returned.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("course has not been created")]
    CourseNotCreated,
    #[error("course already exists")]
    CourseExists,
    #[error("invalid course configuration: {0}")]
    InvalidConfig(String),
    #[error("display name must be 1 to {limit} characters")]
    InvalidDisplayName { limit: usize },
    #[error("unknown participant {0}")]
    UnknownParticipant(String),
    #[error("unknown round {0}")]
    UnknownRound(String),
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("unknown review {0}")]
    UnknownReview(String),
    #[error("an earlier round has not been released yet")]
    RoundInProgress,
    #[error("cannot move from {from} to {to}")]
    IllegalTransition { from: Phase, to: Phase },
    #[error("at least two submissions are needed to start reviewing, found {found}")]
    InsufficientSubmissions { found: usize },
    #[error("{pending} review tasks are still pending")]
    IncompleteReviews { pending: usize },
    #[error("not allowed during the {phase} phase")]
    PhaseClosed { phase: Phase },
    #[error("introductions are disabled in blind courses")]
    BlindModeActive,
    #[error("text is {actual} characters, limit is {limit}")]
    TooLong { limit: usize, actual: usize },
    #[error("submission content is empty")]
    EmptyContent,
    #[error("task belongs to another reviewer")]
    NotYourTask,
    #[error("task is {status:?}, not pending")]
    TaskNotPending { status: TaskStatus },
    #[error("expected exactly {expected} prompts, got {actual}")]
    WrongPromptCount { expected: usize, actual: usize },
    #[error("all feedback prompts are empty")]
    AllPromptsEmpty,
    #[error("grade {grade} outside [{min}, {max}]")]
    GradeOutOfRange { grade: i64, min: i64, max: i64 },
    #[error("stars must be 1 to 5, got {0}")]
    StarsOutOfRange(i64),
    #[error("review was already rated")]
    AlreadyRated,
    #[error("only the reviewed author can rate this review")]
    NotReceiver,
    #[error("only the reviewer and the reviewed author can post here")]
    NotAParty,
    #[error("message body is empty")]
    EmptyBody,
    #[error("grades stay hidden until all received feedback is rated")]
    GradesPending,
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

impl DomainError {
    /// Stable machine-readable name.
    pub fn code(&self) -> &'static str {
        match self {
            DomainError::CourseNotCreated => "CourseNotCreated",
            DomainError::CourseExists => "CourseExists",
            DomainError::InvalidConfig(_) => "InvalidConfig",
            DomainError::InvalidDisplayName { .. } => "InvalidDisplayName",
            DomainError::UnknownParticipant(_) => "UnknownParticipant",
            DomainError::UnknownRound(_) => "UnknownRound",
            DomainError::UnknownTask(_) => "UnknownTask",
            DomainError::UnknownReview(_) => "UnknownReview",
            DomainError::RoundInProgress => "RoundInProgress",
            DomainError::IllegalTransition { .. } => "IllegalTransition",
            DomainError::InsufficientSubmissions { .. } => "InsufficientSubmissions",
            DomainError::IncompleteReviews { .. } => "IncompleteReviews",
            DomainError::PhaseClosed { .. } => "PhaseClosed",
            DomainError::BlindModeActive => "BlindModeActive",
            DomainError::TooLong { .. } => "TooLong",
            DomainError::EmptyContent => "EmptyContent",
            DomainError::NotYourTask => "NotYourTask",
            DomainError::TaskNotPending { .. } => "TaskNotPending",
            DomainError::WrongPromptCount { .. } => "WrongPromptCount",
            DomainError::AllPromptsEmpty => "AllPromptsEmpty",
            DomainError::GradeOutOfRange { .. } => "GradeOutOfRange",
            DomainError::StarsOutOfRange(_) => "StarsOutOfRange",
            DomainError::AlreadyRated => "AlreadyRated",
            DomainError::NotReceiver => "NotReceiver",
            DomainError::NotAParty => "NotAParty",
            DomainError::EmptyBody => "EmptyBody",
            DomainError::GradesPending => "GradesPending",
            DomainError::Matching(MatchingError::TooFewSubmitters(_)) => "TooFewSubmitters",
            DomainError::Matching(_) => "MatchingFailed",
        }
    }
}

/// An event could not be folded into the current state. Seen only when a log
/// was produced by something other than [`crate::Course::decide`] or was
/// applied out of order.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("expected sequence {expected}, got {actual}")]
    SequenceGap { expected: u64, actual: u64 },
    #[error("event does not fit current state: {0}")]
    Inconsistent(String),
}
