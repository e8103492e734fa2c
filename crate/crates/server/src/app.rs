//! Shared service state: open courses, tokens and the admin secret.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use anyhow::Context;
use axum::http::HeaderMap;
use chrono::{Duration, Utc};
use ipr_core::{Command, Course, CourseConfig, CourseId, DomainError, DomainEvent, Event, ParticipantId};
use ipr_store::CourseStore;

use crate::config::ServerConfig;
use crate::error::ApiError;
use crate::tokens::{fresh_token, AccessToken, TokenFault, TokenStore};

/// Who is calling, after the bearer token has been checked. As an extractor
/// it runs before the body is parsed, so bad tokens always win over bad bodies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Caller {
    Admin,
    Participant { id: ParticipantId, course: CourseId },
}

struct Slot {
    store: CourseStore,
    state: Course,
    since_snapshot: u64,
}

type SlotRef = Arc<RwLock<Slot>>;

pub struct App {
    config: ServerConfig,
    admin_token: String,
    courses: RwLock<BTreeMap<CourseId, SlotRef>>,
    tokens: Mutex<TokenStore>,
}

impl App {
    /// Opens every course found under `data_dir/courses`.
    pub fn open(config: ServerConfig) -> anyhow::Result<Self> {
        let root = config.data_dir.join("courses");
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        let mut courses = BTreeMap::new();
        let mut dirs: Vec<PathBuf> =
            fs::read_dir(&root)?.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_dir()).collect();
        dirs.sort();
        for dir in dirs {
            let (store, state, recovery) =
                CourseStore::open(&dir).with_context(|| format!("opening course at {}", dir.display()))?;
            if recovery.discarded_bytes > 0 {
                tracing::warn!(dir = %dir.display(), bytes = recovery.discarded_bytes, "dropped torn log tail");
            }
            if !state.is_created() {
                continue;
            }
            tracing::info!(course = %state.id, seq = state.last_seq, "course loaded");
            courses.insert(state.id.clone(), Arc::new(RwLock::new(Slot { store, state, since_snapshot: 0 })));
        }
        let tokens = TokenStore::load(config.data_dir.join("tokens.json"))?;
        let admin_token = config.admin_token.clone().unwrap_or_else(|| {
            let t = fresh_token();
            tracing::warn!(token = %t, "ADMIN_TOKEN not configured, generated one for this run");
            t
        });
        Ok(Self { config, admin_token, courses: RwLock::new(courses), tokens: Mutex::new(tokens) })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn admin_token(&self) -> &str {
        &self.admin_token
    }

    pub fn authenticate(&self, headers: &HeaderMap) -> Result<Caller, ApiError> {
        let raw = headers
            .get(axum::http::header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::Unauthorized("MissingToken", "bearer token required".into()))?;
        if raw == self.admin_token {
            return Ok(Caller::Admin);
        }
        let tokens = self.tokens.lock().unwrap_or_else(|p| p.into_inner());
        match tokens.check(raw, Utc::now()) {
            Ok(t) => Ok(Caller::Participant { id: t.participant.clone(), course: t.course.clone() }),
            Err(TokenFault::Unknown) => Err(ApiError::Unauthorized("InvalidToken", "token not recognised".into())),
            Err(TokenFault::Expired) => Err(ApiError::Unauthorized("TokenExpired", "token has expired".into())),
        }
    }

    fn slot(&self, course: &CourseId) -> Result<SlotRef, ApiError> {
        let courses = self.courses.read().unwrap_or_else(|p| p.into_inner());
        courses.get(course).cloned().ok_or_else(|| ApiError::UnknownCourse(course.to_string()))
    }

    /// Runs `f` against the current state of `course` under a read lock.
    pub fn read<R>(&self, course: &CourseId, f: impl FnOnce(&Course) -> Result<R, DomainError>) -> Result<R, ApiError> {
        let slot = self.slot(course)?;
        let guard = slot.read().unwrap_or_else(|p| p.into_inner());
        Ok(f(&guard.state)?)
    }

    /// Decides, persists and applies `command`, then hands the new state and
    /// the produced events to `f`. Writers to one course are serialised.
    pub fn execute<R>(
        &self,
        course: &CourseId,
        command: &Command,
        f: impl FnOnce(&Course, &[Event]) -> R,
    ) -> Result<R, ApiError> {
        let slot = self.slot(course)?;
        let mut guard = slot.write().unwrap_or_else(|p| p.into_inner());
        let events = guard.state.decide(command, Utc::now())?;
        Self::commit(&mut guard, &events, self.config.snapshot_every)?;
        Ok(f(&guard.state, &events))
    }

    fn commit(slot: &mut Slot, events: &[Event], snapshot_every: u64) -> Result<(), ApiError> {
        slot.store.append(events)?;
        for event in events {
            slot.state.apply(event).map_err(|e| ApiError::Storage(e.to_string()))?;
        }
        slot.since_snapshot += events.len() as u64;
        if snapshot_every > 0 && slot.since_snapshot >= snapshot_every {
            slot.store.snapshot(&slot.state)?;
            slot.since_snapshot = 0;
        }
        Ok(())
    }

    /// Creates a course with the given id, or the next free `c<n>`.
    pub fn create_course(&self, requested: Option<String>, config: CourseConfig) -> Result<Course, ApiError> {
        let mut courses = self.courses.write().unwrap_or_else(|p| p.into_inner());
        let id = match requested {
            Some(raw) => {
                if !CourseId::is_well_formed(&raw) {
                    return Err(DomainError::InvalidConfig(format!(
                        "course id {raw:?} must be 1 to 64 of [A-Za-z0-9_-]"
                    ))
                    .into());
                }
                CourseId::new(raw)
            }
            None => (courses.len() + 1..)
                .map(|n| CourseId::new(format!("c{n}")))
                .find(|id| !courses.contains_key(id) && !self.course_dir(id).exists())
                .expect("unbounded range"),
        };
        if courses.contains_key(&id) || self.course_dir(&id).exists() {
            return Err(DomainError::CourseExists.into());
        }
        let command = Command::CreateCourse { course: id.clone(), config };
        let events = Course::default().decide(&command, Utc::now())?;
        let (store, state, _) = CourseStore::open(self.course_dir(&id))?;
        let mut slot = Slot { store, state, since_snapshot: 0 };
        Self::commit(&mut slot, &events, self.config.snapshot_every)?;
        let created = slot.state.clone();
        courses.insert(id, Arc::new(RwLock::new(slot)));
        Ok(created)
    }

    fn course_dir(&self, id: &CourseId) -> PathBuf {
        self.config.data_dir.join("courses").join(id.as_str())
    }

    /// Enrolls a participant and issues their first token.
    pub fn enroll(&self, course: &CourseId, display_name: String) -> Result<AccessToken, ApiError> {
        let command = Command::Enroll { display_name };
        let participant = self.execute(course, &command, |_, events| {
            events.iter().find_map(|e| match &e.change {
                DomainEvent::ParticipantEnrolled { participant, .. } => Some(participant.clone()),
                _ => None,
            })
        })?;
        let participant = participant.ok_or_else(|| ApiError::Storage("enrollment produced no participant".into()))?;
        self.issue_token(participant, course.clone())
    }

    pub fn issue_token(&self, participant: ParticipantId, course: CourseId) -> Result<AccessToken, ApiError> {
        let mut tokens = self.tokens.lock().unwrap_or_else(|p| p.into_inner());
        tokens
            .issue(participant, course, Duration::hours(self.config.token_ttl_hours), Utc::now())
            .map_err(|e| ApiError::Storage(e.to_string()))
    }

    /// Forces a snapshot; returns the sequence number it covers.
    pub fn snapshot(&self, course: &CourseId) -> Result<u64, ApiError> {
        let slot = self.slot(course)?;
        let mut guard = slot.write().unwrap_or_else(|p| p.into_inner());
        guard.store.snapshot(&guard.state)?;
        guard.since_snapshot = 0;
        Ok(guard.state.last_seq)
    }

    /// Copy of the live state, for inspection.
    pub fn course_state(&self, course: &CourseId) -> Option<Course> {
        let slot = self.slot(course).ok()?;
        let guard = slot.read().unwrap_or_else(|p| p.into_inner());
        Some(guard.state.clone())
    }

    pub fn course_ids(&self) -> Vec<CourseId> {
        self.courses.read().unwrap_or_else(|p| p.into_inner()).keys().cloned().collect()
    }
}

impl axum::extract::FromRequestParts<Arc<App>> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut axum::http::request::Parts, app: &Arc<App>) -> Result<Self, ApiError> {
        app.authenticate(&parts.headers)
    }
}
