//! Endpoint reference, served at `/routes` and rendered into `docs/api.md`.

use std::fmt::Write;

use serde::Serialize;

use crate::error::{status_for, ERROR_CODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Access {
    Public,
    Admin,
    Participant,
    /// Admin, or a participant of the course the id belongs to.
    Member,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteDoc {
    pub method: &'static str,
    pub path: &'static str,
    pub access: Access,
    pub summary: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub request: Option<&'static str>,
    pub status: u16,
    pub response: &'static str,
    pub errors: &'static [&'static str],
}

const AUTH: &[&str] = &["MissingToken", "InvalidToken", "TokenExpired"];

pub fn route_table() -> Vec<RouteDoc> {
    use Access::*;
    let r = |method, path, access, summary, request, status, response, errors| RouteDoc {
        method,
        path,
        access,
        summary,
        request,
        status,
        response,
        errors,
    };
    vec![
        r("GET", "/health", Public, "Liveness probe.", None, 200, r#"{"status":"ok"}"#, &[]),
        r("GET", "/routes", Public, "This table as JSON.", None, 200, "[RouteDoc]", &[]),
        r(
            "POST",
            "/courses",
            Admin,
            "Create a course. Every config field is optional.",
            Some(
                r#"{"course_id"?, "condition"?, "k"?, "grade_min"?, "grade_max"?, "nudge_threshold"?, "seed"?, "deadlines"?}"#,
            ),
            201,
            r#"{"course_id", "config"}"#,
            &["AdminOnly", "InvalidConfig", "CourseExists", "InvalidBody"],
        ),
        r(
            "GET",
            "/courses/{c}",
            Admin,
            "Course configuration, participant ids and round summaries.",
            None,
            200,
            r#"{"course_id", "config", "participants", "rounds", "last_seq"}"#,
            &["AdminOnly", "UnknownCourse"],
        ),
        r(
            "POST",
            "/courses/{c}/participants",
            Admin,
            "Enroll a participant and issue their access token.",
            Some(r#"{"display_name"}"#),
            201,
            r#"{"participant_id", "token", "expires_at"}"#,
            &["AdminOnly", "UnknownCourse", "InvalidDisplayName", "InvalidBody"],
        ),
        r(
            "POST",
            "/courses/{c}/participants/{p}/tokens",
            Admin,
            "Issue an additional token for an enrolled participant.",
            None,
            201,
            r#"{"participant_id", "token", "expires_at"}"#,
            &["AdminOnly", "UnknownCourse", "UnknownParticipant"],
        ),
        r(
            "POST",
            "/courses/{c}/rounds",
            Admin,
            "Open the next round. Omitting `roster` enrolls every participant.",
            Some(r#"{"roster"?, "deadlines"?}"#),
            201,
            "RoundView",
            &["AdminOnly", "UnknownCourse", "RoundInProgress", "UnknownParticipant", "InvalidConfig", "InvalidBody"],
        ),
        r(
            "POST",
            "/courses/{c}/snapshot",
            Admin,
            "Write a state snapshot now.",
            None,
            200,
            r#"{"course_id", "covering_seq"}"#,
            &["AdminOnly", "UnknownCourse", "StorageFailure"],
        ),
        r(
            "GET",
            "/rounds/{r}",
            Member,
            "Round status; participants also get their own progress under `you`.",
            None,
            200,
            "RoundView",
            &["WrongCourse", "UnknownCourse", "UnknownRound"],
        ),
        r(
            "POST",
            "/rounds/{r}/phase",
            Admin,
            "Advance the round one phase. Entering reviewing runs the matcher.",
            Some(r#"{"target", "force"?}"#),
            200,
            r#"{"from", "to", "tasks_created", "expired"?, "round"}"#,
            &[
                "AdminOnly",
                "UnknownCourse",
                "UnknownRound",
                "IllegalTransition",
                "InsufficientSubmissions",
                "IncompleteReviews",
                "TooFewSubmitters",
                "MatchingFailed",
                "InvalidBody",
            ],
        ),
        r(
            "POST",
            "/rounds/{r}/submissions",
            Participant,
            "Submit or replace the caller's work for the round.",
            Some(r#"{"content_ref"}"#),
            201,
            r#"{"author", "round", "content_ref", "submitted_at"}"#,
            &[
                "ParticipantOnly",
                "WrongCourse",
                "UnknownRound",
                "UnknownParticipant",
                "PhaseClosed",
                "EmptyContent",
                "TooLong",
                "InvalidBody",
            ],
        ),
        r(
            "PUT",
            "/participants/{p}/intro",
            Participant,
            "Set the caller's public introduction. Identified courses only.",
            Some(r#"{"text"}"#),
            200,
            r#"{"participant_id", "intro"}"#,
            &["ParticipantOnly", "WrongCourse", "NotYou", "BlindModeActive", "TooLong", "InvalidBody"],
        ),
        r(
            "GET",
            "/rounds/{r}/tasks?reviewer={p}",
            Participant,
            "Pending review tasks. Authors are named only in identified courses.",
            None,
            200,
            r#"{"round", "phase", "tasks": [TaskView]}"#,
            &["ParticipantOnly", "WrongCourse", "NotYou", "UnknownRound", "InvalidBody"],
        ),
        r(
            "POST",
            "/tasks/{t}/review",
            Participant,
            "Submit a review: four prompts plus a grade. Short prompts trigger an actionability nudge.",
            Some(r#"{"prompts": [4 strings], "grade"}"#),
            201,
            r#"{"review_id", "task_id", "nudge"?, "short_prompts"?}"#,
            &[
                "ParticipantOnly",
                "WrongCourse",
                "UnknownTask",
                "NotYourTask",
                "TaskNotPending",
                "PhaseClosed",
                "WrongPromptCount",
                "AllPromptsEmpty",
                "TooLong",
                "GradeOutOfRange",
                "InvalidBody",
            ],
        ),
        r(
            "GET",
            "/rounds/{r}/feedback?participant={p}",
            Participant,
            "Feedback received. Grades are omitted until every review has been rated.",
            None,
            200,
            r#"{"round", "phase", "grades_visible", "feedback": [FeedbackView]}"#,
            &["ParticipantOnly", "WrongCourse", "NotYou", "UnknownRound", "InvalidBody"],
        ),
        r(
            "POST",
            "/reviews/{v}/rating",
            Participant,
            "Rate a received review from 1 to 5 stars. Ratings are final.",
            Some(r#"{"stars"}"#),
            201,
            r#"{"review_id", "stars", "grades_visible"}"#,
            &[
                "ParticipantOnly",
                "WrongCourse",
                "UnknownReview",
                "NotReceiver",
                "AlreadyRated",
                "PhaseClosed",
                "StarsOutOfRange",
                "InvalidBody",
            ],
        ),
        r(
            "POST",
            "/reviews/{v}/messages",
            Participant,
            "Post to the conversation between a review's author and receiver.",
            Some(r#"{"body"}"#),
            201,
            "MessageView",
            &[
                "ParticipantOnly",
                "WrongCourse",
                "UnknownReview",
                "NotAParty",
                "PhaseClosed",
                "EmptyBody",
                "TooLong",
                "InvalidBody",
            ],
        ),
        r(
            "GET",
            "/reviews/{v}/messages",
            Participant,
            "The conversation attached to a review.",
            None,
            200,
            r#"{"review_id", "messages": [MessageView]}"#,
            &["ParticipantOnly", "WrongCourse", "UnknownReview", "NotAParty"],
        ),
        r(
            "GET",
            "/rounds/{r}/grades?participant={p}",
            Participant,
            "Grades received and their lower-median aggregate, once gating allows.",
            None,
            200,
            r#"{"participant", "round", "per_review_grades", "aggregate"?}"#,
            &["ParticipantOnly", "WrongCourse", "NotYou", "UnknownRound", "GradesPending", "InvalidBody"],
        ),
    ]
}

/// Markdown rendering of [`route_table`] plus the error code table.
pub fn render_markdown() -> String {
    let mut out = String::new();
    out.push_str("# HTTP API\n\n");
    out.push_str("Generated by `ipr-server routes`. Do not edit by hand.\n\n");
    out.push_str("Requests and responses are JSON with snake_case fields and RFC 3339 UTC timestamps. ");
    out.push_str("Authenticate with `Authorization: Bearer <token>`. Errors have the shape ");
    out.push_str("`{\"error\": <code>, \"message\": <text>}`.\n\n");
    out.push_str("| Method | Path | Access | Success | Summary |\n|---|---|---|---|---|\n");
    for route in route_table() {
        let access =
            serde_json::to_value(route.access).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        let _ = writeln!(
            out,
            "| {} | `{}` | {} | {} | {} |",
            route.method, route.path, access, route.status, route.summary
        );
    }
    for route in route_table() {
        let _ = writeln!(out, "\n## {} {}\n\n{}\n", route.method, route.path, route.summary);
        if let Some(req) = route.request {
            let _ = writeln!(out, "Request: `{req}`\n");
        }
        let _ = writeln!(out, "Response {}: `{}`\n", route.status, route.response);
        let mut errors: Vec<&str> = route.errors.to_vec();
        if route.access != Access::Public {
            errors.splice(0..0, AUTH.iter().copied());
        }
        if !errors.is_empty() {
            out.push_str("Errors:\n\n");
            for code in errors {
                let _ = writeln!(out, "- {} `{}`", status_for(code).as_u16(), code);
            }
        }
    }
    out.push_str("\n## Error codes\n\n| Code | Status |\n|---|---|\n");
    for code in ERROR_CODES {
        let _ = writeln!(out, "| `{}` | {} |", code, status_for(code).as_u16());
    }
    out
}
