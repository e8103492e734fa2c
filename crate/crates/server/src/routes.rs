//! HTTP handlers and the router.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::rejection::PathRejection;
use axum::extract::{FromRequest, FromRequestParts, Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use ipr_core::{
    actionability_nudge, Command, Condition, Course, CourseConfig, CourseId, DomainError, DomainEvent, FeedbackView,
    GradeReport, MessageView, ParticipantId, Phase, ReviewId, Round, RoundId, Submission, TaskId, TaskView, Timestamp,
};
use serde::{Deserialize, Serialize};

use crate::app::{App, Caller};
use crate::docs::route_table;
use crate::error::ApiError;

type Shared = State<Arc<App>>;
type ApiResult<T> = Result<T, ApiError>;

/// JSON request body; decoding failures become 422 `InvalidBody`.
#[derive(FromRequest, Deserialize)]
#[serde(transparent)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct Body<T>(pub T);

#[derive(FromRequestParts, Deserialize)]
#[serde(transparent)]
#[from_request(via(axum::extract::Path), rejection(ApiError))]
pub struct Id(pub String);

#[derive(FromRequestParts, Deserialize)]
#[serde(transparent)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct Params<T>(pub T);

pub fn router(app: Arc<App>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/routes", get(routes))
        .route("/courses", post(create_course))
        .route("/courses/{c}", get(course_summary))
        .route("/courses/{c}/participants", post(enroll))
        .route("/courses/{c}/participants/{p}/tokens", post(reissue_token))
        .route("/courses/{c}/rounds", post(create_round))
        .route("/courses/{c}/snapshot", post(snapshot))
        .route("/rounds/{r}", get(round_status))
        .route("/rounds/{r}/phase", post(advance_phase))
        .route("/rounds/{r}/submissions", post(submit))
        .route("/participants/{p}/intro", put(record_intro))
        .route("/rounds/{r}/tasks", get(tasks))
        .route("/tasks/{t}/review", post(submit_review))
        .route("/rounds/{r}/feedback", get(feedback))
        .route("/reviews/{v}/rating", post(rate))
        .route("/reviews/{v}/messages", post(post_message).get(messages))
        .route("/rounds/{r}/grades", get(grades))
        .fallback(|| async { ApiError::NoRoute })
        .layer(axum::middleware::map_request(read_body))
        .with_state(app)
}

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 2 * 1024 * 1024;

/// Reads the whole body up front. Requests rejected before their body was
/// consumed would otherwise leave unread bytes behind and cost the client
/// its keep-alive connection.
async fn read_body(req: axum::extract::Request) -> Result<axum::extract::Request, ApiError> {
    let (parts, body) = req.into_parts();
    let bytes = axum::body::to_bytes(body, BODY_LIMIT)
        .await
        .map_err(|e| ApiError::InvalidBody(format!("unreadable body: {e}")))?;
    Ok(axum::extract::Request::from_parts(parts, axum::body::Body::from(bytes)))
}

fn require_admin(caller: &Caller) -> ApiResult<()> {
    match caller {
        Caller::Admin => Ok(()),
        Caller::Participant { .. } => Err(ApiError::Forbidden("AdminOnly", "admin token required".into())),
    }
}

/// The calling participant, provided their token belongs to `course`.
fn member_of(caller: Caller, course: &CourseId) -> ApiResult<ParticipantId> {
    match caller {
        Caller::Admin => Err(ApiError::Forbidden("ParticipantOnly", "participant token required".into())),
        Caller::Participant { id, course: own } if &own == course => Ok(id),
        Caller::Participant { .. } => {
            Err(ApiError::Unauthorized("WrongCourse", "token belongs to another course".into()))
        }
    }
}

/// An explicit `?participant=` style parameter must name the caller.
fn same_person(me: &ParticipantId, named: Option<&ParticipantId>) -> ApiResult<()> {
    match named {
        Some(p) if p != me => Err(ApiError::Forbidden("NotYou", "participants can only act for themselves".into())),
        _ => Ok(()),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn routes() -> Json<Vec<crate::docs::RouteDoc>> {
    Json(route_table())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateCourseRequest {
    pub course_id: Option<String>,
    pub condition: Option<Condition>,
    pub k: Option<usize>,
    pub grade_min: Option<i64>,
    pub grade_max: Option<i64>,
    pub nudge_threshold: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub deadlines: BTreeMap<Phase, Timestamp>,
}

impl CreateCourseRequest {
    fn config(&self) -> CourseConfig {
        let d = CourseConfig::default();
        CourseConfig {
            condition: self.condition.unwrap_or(d.condition),
            k: self.k.unwrap_or(d.k),
            grade_min: self.grade_min.unwrap_or(d.grade_min),
            grade_max: self.grade_max.unwrap_or(d.grade_max),
            nudge_threshold: self.nudge_threshold.unwrap_or(d.nudge_threshold),
            seed: self.seed.unwrap_or(d.seed),
            deadlines: self.deadlines.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CourseCreated {
    pub course_id: CourseId,
    pub config: CourseConfig,
}

async fn create_course(
    State(app): Shared,
    caller: Caller,
    Body(req): Body<CreateCourseRequest>,
) -> ApiResult<(StatusCode, Json<CourseCreated>)> {
    require_admin(&caller)?;
    let config = req.config();
    let course = app.create_course(req.course_id, config)?;
    tracing::info!(course = %course.id, "course created");
    Ok((StatusCode::CREATED, Json(CourseCreated { course_id: course.id, config: course.config })))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CourseSummary {
    pub course_id: CourseId,
    pub config: CourseConfig,
    pub participants: Vec<ParticipantId>,
    pub rounds: Vec<RoundView>,
    pub last_seq: u64,
}

async fn course_summary(State(app): Shared, caller: Caller, Id(c): Id) -> ApiResult<Json<CourseSummary>> {
    require_admin(&caller)?;
    let summary = app.read(&CourseId::new(c), |course| {
        Ok(CourseSummary {
            course_id: course.id.clone(),
            config: course.config.clone(),
            participants: course.participants.keys().cloned().collect(),
            rounds: course.rounds.values().map(|r| RoundView::new(r, None)).collect(),
            last_seq: course.last_seq,
        })
    })?;
    Ok(Json(summary))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrollRequest {
    pub display_name: String,
}

/// Enrollment answer. Deliberately carries no display name.
#[derive(Debug, Serialize, Deserialize)]
pub struct TokenIssued {
    pub participant_id: ParticipantId,
    pub token: String,
    pub expires_at: Timestamp,
}

async fn enroll(
    State(app): Shared,
    caller: Caller,
    Id(c): Id,
    Body(req): Body<EnrollRequest>,
) -> ApiResult<(StatusCode, Json<TokenIssued>)> {
    require_admin(&caller)?;
    let token = app.enroll(&CourseId::new(c), req.display_name)?;
    Ok((
        StatusCode::CREATED,
        Json(TokenIssued { participant_id: token.participant, token: token.token, expires_at: token.expires_at }),
    ))
}

async fn reissue_token(
    State(app): Shared,
    caller: Caller,
    path: Result<Path<(String, String)>, PathRejection>,
) -> ApiResult<(StatusCode, Json<TokenIssued>)> {
    require_admin(&caller)?;
    let Path((c, p)) = path?;
    let course = CourseId::new(c);
    let participant = ParticipantId::new(p);
    app.read(&course, |state| state.participant(&participant).map(|_| ()))?;
    if participant.course() != course {
        return Err(DomainError::UnknownParticipant(participant.to_string()).into());
    }
    let token = app.issue_token(participant, course)?;
    Ok((
        StatusCode::CREATED,
        Json(TokenIssued { participant_id: token.participant, token: token.token, expires_at: token.expires_at }),
    ))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRoundRequest {
    #[serde(default)]
    pub roster: Option<Vec<ParticipantId>>,
    #[serde(default)]
    pub deadlines: BTreeMap<Phase, Timestamp>,
}

/// Public facts about a round. `you` is filled in for participant callers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundView {
    pub round_id: RoundId,
    pub number: u32,
    pub condition: Condition,
    pub phase: Phase,
    pub k: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub deadlines: BTreeMap<Phase, Timestamp>,
    pub roster_size: usize,
    pub submissions: usize,
    pub pending_tasks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub released_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub you: Option<YourRound>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YourRound {
    pub on_roster: bool,
    pub submitted: bool,
    pub pending_tasks: usize,
    pub reviews_received: usize,
    pub grades_visible: bool,
}

impl RoundView {
    fn new(round: &Round, you: Option<YourRound>) -> Self {
        Self {
            round_id: round.id().clone(),
            number: round.meta.number,
            condition: round.meta.condition,
            phase: round.phase(),
            k: round.meta.k,
            deadlines: round.meta.deadlines.clone(),
            roster_size: round.meta.roster.len(),
            submissions: round.submissions.len(),
            pending_tasks: round.pending_tasks().count(),
            released_at: round.released_at,
            you,
        }
    }

    fn of(course: &Course, id: &RoundId, viewer: Option<&ParticipantId>) -> Result<Self, DomainError> {
        let round = course.round(id)?;
        let you = viewer
            .map(|p| -> Result<YourRound, DomainError> {
                Ok(YourRound {
                    on_roster: round.meta.roster.contains(p),
                    submitted: round.submissions.contains_key(p),
                    pending_tasks: round.pending_tasks().filter(|t| &t.reviewer == p).count(),
                    reviews_received: round.reviews_received(p).count(),
                    grades_visible: course.grades_visible(id, p)?,
                })
            })
            .transpose()?;
        Ok(Self::new(round, you))
    }
}

async fn create_round(
    State(app): Shared,
    caller: Caller,
    Id(c): Id,
    Body(req): Body<CreateRoundRequest>,
) -> ApiResult<(StatusCode, Json<RoundView>)> {
    require_admin(&caller)?;
    let command = Command::CreateRound { roster: req.roster, deadlines: req.deadlines };
    let view = app.execute(&CourseId::new(c), &command, |course, events| {
        events.iter().find_map(|e| match &e.change {
            DomainEvent::RoundCreated { round } => RoundView::of(course, &round.round_id, None).ok(),
            _ => None,
        })
    })?;
    let view = view.ok_or_else(|| ApiError::Storage("round creation produced no round".into()))?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn snapshot(State(app): Shared, caller: Caller, Id(c): Id) -> ApiResult<Json<serde_json::Value>> {
    require_admin(&caller)?;
    let course = CourseId::new(c);
    let covering_seq = app.snapshot(&course)?;
    Ok(Json(serde_json::json!({ "course_id": course, "covering_seq": covering_seq })))
}

async fn round_status(State(app): Shared, caller: Caller, Id(r): Id) -> ApiResult<Json<RoundView>> {
    let round = RoundId::new(r);
    let course = round.course();
    let viewer = match caller {
        Caller::Admin => None,
        other => Some(member_of(other, &course)?),
    };
    Ok(Json(app.read(&course, |c| RoundView::of(c, &round, viewer.as_ref()))?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdvanceRequest {
    pub target: Phase,
    #[serde(default)]
    pub force: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PhaseChanged {
    pub from: Phase,
    pub to: Phase,
    pub tasks_created: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expired: Vec<TaskId>,
    pub round: RoundView,
}

async fn advance_phase(
    State(app): Shared,
    caller: Caller,
    Id(r): Id,
    Body(req): Body<AdvanceRequest>,
) -> ApiResult<Json<PhaseChanged>> {
    require_admin(&caller)?;
    let round = RoundId::new(r);
    let command = Command::AdvancePhase { round: round.clone(), target: req.target, force: req.force };
    let changed = app.execute(&round.course(), &command, |course, events| {
        let mut from = req.target;
        let mut expired = Vec::new();
        let mut tasks_created = 0;
        for e in events {
            match &e.change {
                DomainEvent::PhaseAdvanced { from: f, expired: x, .. } => {
                    from = *f;
                    expired.clone_from(x);
                }
                DomainEvent::AssignmentCreated { tasks, .. } => tasks_created = tasks.len(),
                _ => {}
            }
        }
        RoundView::of(course, &round, None).map(|view| PhaseChanged {
            from,
            to: req.target,
            tasks_created,
            expired,
            round: view,
        })
    })??;
    tracing::info!(round = %round, to = %changed.to, "phase advanced");
    Ok(Json(changed))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionRequest {
    pub content_ref: String,
}

async fn submit(
    State(app): Shared,
    caller: Caller,
    Id(r): Id,
    Body(req): Body<SubmissionRequest>,
) -> ApiResult<(StatusCode, Json<Submission>)> {
    let round = RoundId::new(r);
    let me = member_of(caller, &round.course())?;
    let command =
        Command::SubmitAssignment { round: round.clone(), participant: me.clone(), content_ref: req.content_ref };
    let submission = app.execute(&round.course(), &command, |course, _| {
        course.round(&round).ok().and_then(|r| r.submissions.get(&me).cloned())
    })?;
    let submission = submission.ok_or_else(|| ApiError::Storage("submission not recorded".into()))?;
    Ok((StatusCode::CREATED, Json(submission)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntroRequest {
    pub text: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntroRecorded {
    pub participant_id: ParticipantId,
    pub intro: String,
}

async fn record_intro(
    State(app): Shared,
    caller: Caller,
    Id(p): Id,
    Body(req): Body<IntroRequest>,
) -> ApiResult<Json<IntroRecorded>> {
    let target = ParticipantId::new(p);
    let me = member_of(caller, &target.course())?;
    same_person(&me, Some(&target))?;
    let command = Command::RecordIntro { participant: me.clone(), text: req.text.clone() };
    app.execute(&me.course(), &command, |_, _| ())?;
    Ok(Json(IntroRecorded { participant_id: me, intro: req.text }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewerQuery {
    pub reviewer: Option<ParticipantId>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TaskList {
    pub round: RoundId,
    pub phase: Phase,
    pub tasks: Vec<TaskView>,
}

async fn tasks(
    State(app): Shared,
    caller: Caller,
    Id(r): Id,
    Params(q): Params<ReviewerQuery>,
) -> ApiResult<Json<TaskList>> {
    let round = RoundId::new(r);
    let me = member_of(caller, &round.course())?;
    same_person(&me, q.reviewer.as_ref())?;
    let list = app.read(&round.course(), |c| {
        Ok(TaskList { round: round.clone(), phase: c.round(&round)?.phase(), tasks: c.tasks_for(&round, &me)? })
    })?;
    Ok(Json(list))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewRequest {
    pub prompts: Vec<String>,
    pub grade: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewAccepted {
    pub review_id: ReviewId,
    pub task_id: TaskId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nudge: Option<String>,
    /// Indices of prompts below the word-count threshold.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub short_prompts: Vec<usize>,
}

async fn submit_review(
    State(app): Shared,
    caller: Caller,
    Id(t): Id,
    Body(req): Body<ReviewRequest>,
) -> ApiResult<(StatusCode, Json<ReviewAccepted>)> {
    let task = TaskId::new(t);
    let me = member_of(caller, &task.course())?;
    let command =
        Command::SubmitReview { task: task.clone(), reviewer: me, prompts: req.prompts.clone(), grade: req.grade };
    let threshold = app.execute(&task.course(), &command, |course, _| course.config.nudge_threshold)?;
    let mut nudge = None;
    let mut short_prompts = Vec::new();
    for (i, text) in req.prompts.iter().enumerate() {
        if let Some(n) = actionability_nudge(text, threshold) {
            nudge = Some(n.to_string());
            short_prompts.push(i);
        }
    }
    Ok((StatusCode::CREATED, Json(ReviewAccepted { review_id: task.review_id(), task_id: task, nudge, short_prompts })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantQuery {
    pub participant: Option<ParticipantId>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeedbackList {
    pub round: RoundId,
    pub phase: Phase,
    pub grades_visible: bool,
    pub feedback: Vec<FeedbackView>,
}

async fn feedback(
    State(app): Shared,
    caller: Caller,
    Id(r): Id,
    Params(q): Params<ParticipantQuery>,
) -> ApiResult<Json<FeedbackList>> {
    let round = RoundId::new(r);
    let me = member_of(caller, &round.course())?;
    same_person(&me, q.participant.as_ref())?;
    let list = app.read(&round.course(), |c| {
        Ok(FeedbackList {
            round: round.clone(),
            phase: c.round(&round)?.phase(),
            grades_visible: c.grades_visible(&round, &me)?,
            feedback: c.feedback_for(&round, &me)?,
        })
    })?;
    Ok(Json(list))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingRequest {
    pub stars: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RatingRecorded {
    pub review_id: ReviewId,
    pub stars: u8,
    pub grades_visible: bool,
}

async fn rate(
    State(app): Shared,
    caller: Caller,
    Id(v): Id,
    Body(req): Body<RatingRequest>,
) -> ApiResult<(StatusCode, Json<RatingRecorded>)> {
    let review = ReviewId::new(v);
    let me = member_of(caller, &review.course())?;
    let command = Command::RateFeedback { review: review.clone(), rater: me.clone(), stars: req.stars };
    let visible = app.execute(&review.course(), &command, |c, _| c.grades_visible(&review.round(), &me))??;
    let stars = u8::try_from(req.stars).map_err(|_| DomainError::StarsOutOfRange(req.stars))?;
    Ok((StatusCode::CREATED, Json(RatingRecorded { review_id: review, stars, grades_visible: visible })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MessageRequest {
    pub body: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Thread {
    pub review_id: ReviewId,
    pub messages: Vec<MessageView>,
}

async fn post_message(
    State(app): Shared,
    caller: Caller,
    Id(v): Id,
    Body(req): Body<MessageRequest>,
) -> ApiResult<(StatusCode, Json<MessageView>)> {
    let review = ReviewId::new(v);
    let me = member_of(caller, &review.course())?;
    let command = Command::PostMessage { review: review.clone(), sender: me.clone(), body: req.body };
    let posted = app.execute(&review.course(), &command, |c, _| c.messages_for(&review, &me))??;
    let last = posted.into_iter().last().ok_or_else(|| ApiError::Storage("message not recorded".into()))?;
    Ok((StatusCode::CREATED, Json(last)))
}

async fn messages(State(app): Shared, caller: Caller, Id(v): Id) -> ApiResult<Json<Thread>> {
    let review = ReviewId::new(v);
    let me = member_of(caller, &review.course())?;
    let messages = app.read(&review.course(), |c| c.messages_for(&review, &me))?;
    Ok(Json(Thread { review_id: review, messages }))
}

async fn grades(
    State(app): Shared,
    caller: Caller,
    Id(r): Id,
    Params(q): Params<ParticipantQuery>,
) -> ApiResult<Json<GradeReport>> {
    let round = RoundId::new(r);
    let me = member_of(caller, &round.course())?;
    same_person(&me, q.participant.as_ref())?;
    Ok(Json(app.read(&round.course(), |c| c.grade_report(&round, &me))?))
}
