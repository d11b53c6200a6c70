//! Config-file loading and flag/file merging.
//!
//! The file is TOML with top-level `seed` / `threads` and one table per
//! subcommand. Keys are the long flag names. A flag given on the command
//! line replaces the same key from the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config: {0}")]
    Parse(String),
    #[error("config key '{key}': {msg}")]
    Key { key: String, msg: String },
}

impl ConfigError {
    pub fn key(key: impl Into<String>, msg: impl Into<String>) -> Self {
        ConfigError::Key { key: key.into(), msg: msg.into() }
    }

    pub fn missing(key: impl Into<String>) -> Self {
        Self::key(key, "required but not set (pass the flag or add it to the config file)")
    }
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Globals {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// A parsed config file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    pub globals: Globals,
    sections: Table,
}

const SECTIONS: [&str; 6] = ["simulate", "fit", "moments", "defaultcorr", "surface", "deltas"];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.message().to_string()))?;
        let mut sections = Table::new();
        for name in SECTIONS {
            if let Some(v) = table.remove(name) {
                if !v.is_table() {
                    return Err(ConfigError::key(name, "must be a table"));
                }
                sections.insert(name.to_string(), v);
            }
        }
        let globals = decode(Value::Table(table), "")?;
        Ok(Self { globals, sections })
    }

    /// Overlay the flags in `cli` onto section `name` and decode the result.
    pub fn merge<T: Serialize + DeserializeOwned>(&self, name: &str, cli: &T) -> Result<T, ConfigError> {
        let mut base = self.sections.get(name).cloned().unwrap_or_else(|| Value::Table(Table::new()));
        let flags = Value::try_from(cli).map_err(|e| ConfigError::Parse(e.to_string()))?;
        overlay(&mut base, flags);
        decode(base, name)
    }
}

fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Table(b), Value::Table(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_table() && v.is_table() => overlay(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn decode<T: DeserializeOwned>(v: Value, section: &str) -> Result<T, ConfigError> {
    T::deserialize(v).map_err(|e| {
        let msg = e.message().to_string();
        // serde messages name the field in backticks
        let key = msg.split('`').nth(1).unwrap_or("?");
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        ConfigError::key(full, msg)
    })
}

/// Unwrap a required setting, naming the key when absent.
pub fn require<T>(value: Option<T>, key: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError::missing(key))
}

/// Reject values outside `[lo, hi]`.
pub fn check_range(value: f64, lo: f64, hi: f64, key: &str) -> Result<f64, ConfigError> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(ConfigError::key(key, format!("{value} is outside [{lo}, {hi}]")))
    }
}
