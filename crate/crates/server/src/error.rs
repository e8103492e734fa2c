use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use ipr_core::DomainError;
use ipr_store::StoreError;
use serde::Serialize;

/// Everything a handler can fail with. The wire form is
/// `{"error": <code>, "message": <text>}` and the status is a function of
/// the code alone, see [`status_for`].
#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    /// Missing, unknown or expired token, or a token from another course.
    #[error("{1}")]
    Unauthorized(&'static str, String),
    #[error("{1}")]
    Forbidden(&'static str, String),
    #[error("no course {0}")]
    UnknownCourse(String),
    #[error("no such route")]
    NoRoute,
    #[error("invalid request: {0}")]
    InvalidBody(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::Domain(e) => e.code(),
            ApiError::Unauthorized(code, _) | ApiError::Forbidden(code, _) => code,
            ApiError::UnknownCourse(_) => "UnknownCourse",
            ApiError::NoRoute => "NoRoute",
            ApiError::InvalidBody(_) => "InvalidBody",
            ApiError::Storage(_) => "StorageFailure",
        }
    }

    pub fn status(&self) -> StatusCode {
        status_for(self.code())
    }
}

/// Error code to HTTP status. Codes not listed here do not exist.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "MissingToken" | "InvalidToken" | "TokenExpired" | "WrongCourse" => StatusCode::UNAUTHORIZED,
        "AdminOnly" | "ParticipantOnly" | "NotYou" | "NotYourTask" | "NotAParty" | "NotReceiver"
        | "UnknownParticipant" => StatusCode::FORBIDDEN,
        "UnknownCourse" | "CourseNotCreated" | "UnknownRound" | "UnknownTask" | "UnknownReview" | "NoRoute" => {
            StatusCode::NOT_FOUND
        }
        "CourseExists"
        | "RoundInProgress"
        | "IllegalTransition"
        | "InsufficientSubmissions"
        | "IncompleteReviews"
        | "PhaseClosed"
        | "BlindModeActive"
        | "TaskNotPending"
        | "AlreadyRated"
        | "GradesPending"
        | "TooFewSubmitters"
        | "MatchingFailed" => StatusCode::CONFLICT,
        "InvalidConfig" | "InvalidDisplayName" | "TooLong" | "EmptyContent" | "WrongPromptCount"
        | "AllPromptsEmpty" | "GradeOutOfRange" | "StarsOutOfRange" | "EmptyBody" | "InvalidBody" => {
            StatusCode::UNPROCESSABLE_ENTITY
        }
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

/// Every code the service can emit, in documentation order.
pub const ERROR_CODES: &[&str] = &[
    "MissingToken",
    "InvalidToken",
    "TokenExpired",
    "WrongCourse",
    "AdminOnly",
    "ParticipantOnly",
    "NotYou",
    "NotYourTask",
    "NotAParty",
    "NotReceiver",
    "UnknownParticipant",
    "UnknownCourse",
    "CourseNotCreated",
    "UnknownRound",
    "UnknownTask",
    "UnknownReview",
    "NoRoute",
    "CourseExists",
    "RoundInProgress",
    "IllegalTransition",
    "InsufficientSubmissions",
    "IncompleteReviews",
    "PhaseClosed",
    "BlindModeActive",
    "TaskNotPending",
    "AlreadyRated",
    "GradesPending",
    "TooFewSubmitters",
    "MatchingFailed",
    "InvalidConfig",
    "InvalidDisplayName",
    "TooLong",
    "EmptyContent",
    "WrongPromptCount",
    "AllPromptsEmpty",
    "GradeOutOfRange",
    "StarsOutOfRange",
    "EmptyBody",
    "InvalidBody",
    "StorageFailure",
];

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Storage(e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::InvalidBody(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::InvalidBody(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::InvalidBody(e.body_text())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            tracing::error!(error = %self, "request failed");
        }
        (status, Json(ErrorBody { error: self.code(), message: self.to_string() })).into_response()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_storage_is_a_server_error() {
        for code in ERROR_CODES {
            let status = status_for(code);
            assert_eq!(status.is_server_error(), *code == "StorageFailure", "{code} -> {status}");
        }
    }

    #[test]
    fn every_domain_code_is_documented() {
        use ipr_core::{Phase, TaskStatus};
        use ipr_matching::MatchingError;
        let samples = [
            DomainError::CourseNotCreated,
            DomainError::CourseExists,
            DomainError::InvalidConfig(String::new()),
            DomainError::InvalidDisplayName { limit: 1 },
            DomainError::UnknownParticipant(String::new()),
            DomainError::UnknownRound(String::new()),
            DomainError::UnknownTask(String::new()),
            DomainError::UnknownReview(String::new()),
            DomainError::RoundInProgress,
            DomainError::IllegalTransition { from: Phase::Submission, to: Phase::Released },
            DomainError::InsufficientSubmissions { found: 1 },
            DomainError::IncompleteReviews { pending: 1 },
            DomainError::PhaseClosed { phase: Phase::Rating },
            DomainError::BlindModeActive,
            DomainError::TooLong { limit: 1, actual: 2 },
            DomainError::EmptyContent,
            DomainError::NotYourTask,
            DomainError::TaskNotPending { status: TaskStatus::Reviewed },
            DomainError::WrongPromptCount { expected: 4, actual: 3 },
            DomainError::AllPromptsEmpty,
            DomainError::GradeOutOfRange { grade: 1, min: 2, max: 3 },
            DomainError::StarsOutOfRange(9),
            DomainError::AlreadyRated,
            DomainError::NotReceiver,
            DomainError::NotAParty,
            DomainError::EmptyBody,
            DomainError::GradesPending,
            DomainError::Matching(MatchingError::TooFewSubmitters(1)),
            DomainError::Matching(MatchingError::ZeroFanOut),
        ];
        for e in samples {
            let code = e.code();
            assert!(ERROR_CODES.contains(&code), "{code}");
            assert!(!status_for(code).is_server_error(), "{code}");
        }
    }
}
