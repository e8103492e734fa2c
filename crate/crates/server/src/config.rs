//! Service configuration: a `key = value` file, then environment overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    pub data_dir: PathBuf,
    pub log_level: String,
    /// Bearer token for admin endpoints. Generated at startup when unset.
    pub admin_token: Option<String>,
    pub token_ttl_hours: i64,
    /// Write a snapshot after this many events; 0 disables automatic snapshots.
    pub snapshot_every: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            log_level: "info".into(),
            admin_token: None,
            token_ttl_hours: 24 * 120,
            snapshot_every: 500,
        }
    }
}

pub const ENV_KEYS: [&str; 7] =
    ["PORT", "DATA_DIR", "LOG_LEVEL", "ADMIN_TOKEN", "BIND", "TOKEN_TTL_HOURS", "SNAPSHOT_EVERY"];

impl ServerConfig {
    /// Reads `path` (if given), then applies overrides from `env`.
    pub fn load(path: Option<&Path>, env: impl IntoIterator<Item = (String, String)>) -> anyhow::Result<Self> {
        let mut pairs = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                parse_key_values(&text)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in env {
            if ENV_KEYS.contains(&k.as_str()) {
                pairs.insert(k, v);
            }
        }
        Self::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> anyhow::Result<Self> {
        let mut cfg = Self::default();
        for (key, value) in pairs {
            match key.as_str() {
                "BIND" => cfg.bind = value.clone(),
                "PORT" => cfg.port = value.parse().with_context(|| format!("PORT={value}"))?,
                "DATA_DIR" => cfg.data_dir = PathBuf::from(value),
                "LOG_LEVEL" => cfg.log_level = value.clone(),
                "ADMIN_TOKEN" => cfg.admin_token = (!value.is_empty()).then(|| value.clone()),
                "TOKEN_TTL_HOURS" => {
                    cfg.token_ttl_hours = value.parse().with_context(|| format!("TOKEN_TTL_HOURS={value}"))?
                }
                "SNAPSHOT_EVERY" => {
                    cfg.snapshot_every = value.parse().with_context(|| format!("SNAPSHOT_EVERY={value}"))?
                }
                other => bail!("unknown configuration key {other}"),
            }
        }
        Ok(cfg)
    }
}

/// `KEY = value` lines; `#` starts a comment line. Keys are upper-cased.
pub fn parse_key_values(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value", i + 1);
        };
        let v = v.trim();
        let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
        out.insert(k.trim().to_ascii_uppercase(), v.to_string());
    }
    Ok(out)
}
