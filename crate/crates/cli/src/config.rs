//! Config files of `key = value` lines. Precedence is: command-line flag,
//! then config file, then built-in default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{CliError, CliResult};

/// Keys accepted in a config file; anything else is rejected.
const KNOWN_KEYS: &[&str] = &[
    "cells",
    "seed",
    "lloyd_iters",
    "move_tol",
    "problem",
    "backend",
    "eps_fit",
    "quad_degree",
    "grading",
    "rtol",
    "threads",
];

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "config line {}: expected 'key = value', got '{raw}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::validation(format!(
                    "config line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::validation(format!(
                    "config line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
        }
        Ok(FileConfig { values })
    }

    /// Typed lookup; a present but unparsable value is a validation error.
    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                CliError::validation(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }
}

/// Resolve one option: flag beats config beats default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    cfg: &FileConfig,
    key: &str,
    default: T,
) -> CliResult<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get(key)?.unwrap_or(default))
}
