//! Durable storage for course events.
//!
//! Each course owns a directory holding `events.ndjson`, one JSON object per
//! line:
//!
//! ```text
//! {"seq":1,"ts":"2026-01-05T09:00:00Z","kind":"CourseCreated","payload":{...},"crc32":"1c291ca3"}
//! ```
//!
//! `crc32` covers the line's bytes with the `crc32` member removed, i.e. the
//! object exactly as serialised before the checksum was attached. A record
//! whose checksum does not match, or whose sequence number does not follow
//! its predecessor, marks the log as corrupt from that point.
//!
//! `snapshot.json` optionally holds `{schema_version, covering_seq, state}`;
//! loading resumes replay after `covering_seq`.

mod log;
mod record;
mod snapshot;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use ipr_core::{ApplyError, Course, Event};

pub use log::{read_events, EventLog, ReadMode, Recovery};
pub use record::{decode_record, encode_record, RecordError};
pub use snapshot::{load_snapshot, write_snapshot, Snapshot, SCHEMA_VERSION};

pub const LOG_FILE: &str = "events.ndjson";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("expected sequence {expected}, got {actual}")]
    SequenceConflict { expected: u64, actual: u64 },
    #[error("storage failure: {0}")]
    StorageFailure(#[from] io::Error),
    #[error("log corrupt at line {line} after sequence {last_good_seq}: {reason}")]
    CorruptLog { last_good_seq: u64, line: usize, reason: String },
    #[error("snapshot schema version {found} is not supported (expected {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("snapshot covers sequence {snapshot} but the log ends at {log}")]
    SnapshotAhead { snapshot: u64, log: u64 },
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),
    #[error("replay failed: {0}")]
    Replay(#[from] ApplyError),
}

/// Folds events into `state`, skipping any at or below `state.last_seq`.
pub fn fold<'a>(mut state: Course, events: impl IntoIterator<Item = &'a Event>) -> Result<Course, StoreError> {
    for event in events {
        if event.seq <= state.last_seq {
            continue;
        }
        state.apply(event)?;
    }
    Ok(state)
}

/// Rebuilds a course from its log alone. Any damaged record is an error.
pub fn replay(log_path: &Path) -> Result<Course, StoreError> {
    let events = read_events(log_path, ReadMode::Strict)?.events;
    fold(Course::default(), &events)
}

/// On-disk home of one course: its log plus an optional snapshot.
#[derive(Debug)]
pub struct CourseStore {
    dir: PathBuf,
    log: EventLog,
}

impl CourseStore {
    /// Opens (creating if needed) the course directory and rebuilds state
    /// from snapshot plus log. A torn final record is cut off; damage
    /// anywhere else is an error.
    pub fn open(dir: impl Into<PathBuf>) -> Result<(Self, Course, Recovery), StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let (log, events, recovery) = EventLog::recover(dir.join(LOG_FILE))?;

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let base = if snapshot_path.exists() {
            let snap = load_snapshot(&snapshot_path)?;
            if snap.covering_seq > log.last_seq() {
                return Err(StoreError::SnapshotAhead { snapshot: snap.covering_seq, log: log.last_seq() });
            }
            snap.state
        } else {
            Course::default()
        };
        let state = fold(base, &events)?;
        Ok((Self { dir, log }, state, recovery))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn last_seq(&self) -> u64 {
        self.log.last_seq()
    }

    /// Durably appends `events`; they must continue the sequence.
    pub fn append(&mut self, events: &[Event]) -> Result<u64, StoreError> {
        self.log.append(events)
    }

    pub fn snapshot(&self, state: &Course) -> Result<(), StoreError> {
        write_snapshot(&self.dir.join(SNAPSHOT_FILE), state)
    }
}
