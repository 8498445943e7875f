//! Plain-text `key = value` run configuration and small value parsers.
//!
//! ```text
//! # default rate sweep
//! ratio   = 0.7
//! snr-max = 1
//! ```
//!
//! Keys are the long command-line flag names without the leading `--`.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "ratio", "snr", "snr-min", "snr-max", "snr-hi", "step", "tol", "symbols", "seed", "mode",
    "out", "abs-tol", "points", "sigma2", "workers",
];

/// Parsed config file: validated keys mapped to raw string values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(Error::Config {
                    line,
                    message: format!("expected `key = value`, got {trimmed:?}"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key {key:?}"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("empty value for {key:?}"),
                });
            }
            if entries.insert(key.to_owned(), value.to_owned()).is_some() {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key:?}"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Comma-separated list of finite reals, e.g. `1.7,-1.7, 0.3`.
pub fn parse_points(text: &str) -> Result<Vec<f64>> {
    let points = text
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("not a finite real: {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty point list".into()));
    }
    Ok(points)
}
