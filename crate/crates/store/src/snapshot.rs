use std::fs;
use std::io::Write;
use std::path::Path;

use ipr_core::Course;
use serde::{Deserialize, Serialize};

use crate::StoreError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub covering_seq: u64,
    pub state: Course,
}

/// Writes the snapshot via a temporary file and rename.
pub fn write_snapshot(path: &Path, state: &Course) -> Result<(), StoreError> {
    let snapshot = Snapshot { schema_version: SCHEMA_VERSION, covering_seq: state.last_seq, state: state.clone() };
    let tmp = path.with_extension("json.tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        serde_json::to_writer(&mut file, &snapshot).map_err(|e| StoreError::MalformedSnapshot(e.to_string()))?;
        file.write_all(b"\n")?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot, StoreError> {
    let text = fs::read_to_string(path)?;
    #[derive(Deserialize)]
    struct Header {
        schema_version: u32,
    }
    let header: Header = serde_json::from_str(&text).map_err(|e| StoreError::MalformedSnapshot(e.to_string()))?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(StoreError::VersionMismatch { found: header.schema_version, supported: SCHEMA_VERSION });
    }
    let snapshot: Snapshot = serde_json::from_str(&text).map_err(|e| StoreError::MalformedSnapshot(e.to_string()))?;
    if snapshot.state.last_seq != snapshot.covering_seq {
        return Err(StoreError::MalformedSnapshot(format!(
            "covering_seq {} disagrees with state at {}",
            snapshot.covering_seq, snapshot.state.last_seq
        )));
    }
    Ok(snapshot)
}
