use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ipr_core::Event;

use crate::record::{decode_record, encode_record};
use crate::StoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadMode {
    /// Any damaged record fails the read.
    Strict,
    /// A damaged final record is treated as a torn write and dropped.
    TolerateTornTail,
}

/// What reading a log found.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub events: Vec<Event>,
    /// Byte length of the intact prefix.
    pub valid_len: u64,
    /// Bytes after the intact prefix that were ignored.
    pub discarded_bytes: u64,
}

/// Reads and verifies every record in `path`. A missing file is an empty log.
pub fn read_events(path: &Path, mode: ReadMode) -> Result<Recovery, StoreError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };

    let mut events: Vec<Event> = Vec::new();
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < bytes.len() {
        line_no += 1;
        let end = bytes[offset..].iter().position(|&b| b == b'\n').map(|i| offset + i);
        let line_end = end.unwrap_or(bytes.len());
        let next = end.map_or(bytes.len(), |e| e + 1);
        let last_good_seq = events.last().map_or(0, |e| e.seq);

        let parsed = std::str::from_utf8(&bytes[offset..line_end])
            .map_err(|e| e.to_string())
            .and_then(|line| decode_record(line).map_err(|e| e.to_string()))
            .and_then(|event| {
                if event.seq == last_good_seq + 1 {
                    Ok(event)
                } else {
                    Err(format!("sequence {} does not follow {last_good_seq}", event.seq))
                }
            });

        match parsed {
            Ok(event) => events.push(event),
            Err(reason) => {
                let is_tail = next >= bytes.len();
                if mode == ReadMode::TolerateTornTail && is_tail {
                    return Ok(Recovery {
                        events,
                        valid_len: offset as u64,
                        discarded_bytes: (bytes.len() - offset) as u64,
                    });
                }
                return Err(StoreError::CorruptLog { last_good_seq, line: line_no, reason });
            }
        }
        offset = next;
    }
    Ok(Recovery { events, valid_len: bytes.len() as u64, discarded_bytes: 0 })
}

/// Append handle on a course log. One writer per file.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    last_seq: u64,
}

impl EventLog {
    /// Opens `path`, dropping a torn final record if one is present, and
    /// returns the intact events.
    pub fn recover(path: impl Into<PathBuf>) -> Result<(Self, Vec<Event>, Recovery), StoreError> {
        let path = path.into();
        let recovery = read_events(&path, ReadMode::TolerateTornTail)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        if recovery.discarded_bytes > 0 {
            file.set_len(recovery.valid_len)?;
            file.sync_all()?;
        }
        let mut valid_len = recovery.valid_len;
        // a final record that lost only its newline is intact; terminate it
        if valid_len > 0 && fs::read(&path)?.last() != Some(&b'\n') {
            (&file).write_all(b"\n")?;
            file.sync_data()?;
            valid_len += 1;
        }
        let last_seq = recovery.events.last().map_or(0, |e| e.seq);
        let events = recovery.events.clone();
        Ok((Self { path, file, last_seq }, events, Recovery { valid_len, ..recovery }))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Writes `events` and syncs before returning. Rejects the whole batch
    /// if any sequence number is out of place.
    pub fn append(&mut self, events: &[Event]) -> Result<u64, StoreError> {
        let mut expected = self.last_seq + 1;
        for event in events {
            if event.seq != expected {
                return Err(StoreError::SequenceConflict { expected, actual: event.seq });
            }
            expected += 1;
        }
        let mut out = BufWriter::new(&self.file);
        for event in events {
            out.write_all(encode_record(event).as_bytes())?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        drop(out);
        self.file.sync_data()?;
        self.last_seq = expected - 1;
        Ok(self.last_seq)
    }
}
