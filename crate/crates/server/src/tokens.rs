//! Participant access tokens, persisted as one JSON file.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::Duration;
use ipr_core::{CourseId, ParticipantId, Timestamp};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessToken {
    pub token: String,
    pub participant: ParticipantId,
    pub course: CourseId,
    pub expires_at: Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenFault {
    Unknown,
    Expired,
}

/// 128 random bits as 32 lowercase hex digits.
pub fn fresh_token() -> String {
    format!("{:032x}", rand::rng().random::<u128>())
}

#[derive(Debug)]
pub struct TokenStore {
    path: PathBuf,
    tokens: BTreeMap<String, AccessToken>,
}

#[derive(Serialize, Deserialize)]
struct TokenFile {
    tokens: Vec<AccessToken>,
}

impl TokenStore {
    pub fn load(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        let tokens = match fs::read(&path) {
            Ok(bytes) => {
                let file: TokenFile =
                    serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                file.tokens.into_iter().map(|t| (t.token.clone(), t)).collect()
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e),
        };
        Ok(Self { path, tokens })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn issue(
        &mut self,
        participant: ParticipantId,
        course: CourseId,
        ttl: Duration,
        now: Timestamp,
    ) -> io::Result<AccessToken> {
        let token = AccessToken { token: fresh_token(), participant, course, expires_at: now + ttl };
        self.tokens.insert(token.token.clone(), token.clone());
        self.persist()?;
        Ok(token)
    }

    pub fn check(&self, token: &str, now: Timestamp) -> Result<&AccessToken, TokenFault> {
        let found = self.tokens.get(token).ok_or(TokenFault::Unknown)?;
        if found.expires_at <= now {
            return Err(TokenFault::Expired);
        }
        Ok(found)
    }

    fn persist(&self) -> io::Result<()> {
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let file = TokenFile { tokens: self.tokens.values().cloned().collect() };
        let tmp = self.path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(&file)?)?;
        fs::rename(&tmp, &self.path)
    }
}
