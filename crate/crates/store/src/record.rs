use ipr_core::Event;

const CRC_KEY: &str = ",\"crc32\":\"";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("record has no checksum")]
    MissingChecksum,
    #[error("checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },
    #[error("record body is not a valid event: {0}")]
    Malformed(String),
}

/// One log line, without the trailing newline.
pub fn encode_record(event: &Event) -> String {
    let body = serde_json::to_string(event).expect("events always serialise");
    let crc = crc32fast::hash(body.as_bytes());
    let mut line = body;
    line.pop(); // closing brace
    line.push_str(CRC_KEY);
    line.push_str(&format!("{crc:08x}\"}}"));
    line
}

pub fn decode_record(line: &str) -> Result<Event, RecordError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let at = line.rfind(CRC_KEY).ok_or(RecordError::MissingChecksum)?;
    let stored = line[at + CRC_KEY.len()..].strip_suffix("\"}").ok_or(RecordError::MissingChecksum)?;
    let body = format!("{}}}", &line[..at]);
    let computed = format!("{:08x}", crc32fast::hash(body.as_bytes()));
    if stored != computed {
        return Err(RecordError::ChecksumMismatch { stored: stored.to_string(), computed });
    }
    serde_json::from_str(&body).map_err(|e| RecordError::Malformed(e.to_string()))
}
