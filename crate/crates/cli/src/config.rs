//! Flat `key=value` settings shared by the config file and the command line.
//!
//! Blank lines and lines starting with `#` are ignored. Later sources
//! override earlier ones, so flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{io_err, usage, Result};

/// Every recognised key. Flag names are the same with a `--` prefix.
pub const KEYS: &[&str] = &[
    "function",
    "seed",
    "dim",
    "cond",
    "lambda",
    "optimizer",
    "gamma",
    "mu",
    "L",
    "steps",
    "eps",
    "repeats",
    "out",
    "x0_norm",
    "horizon",
    "dt",
    "samples",
    "radius",
    "plan",
    "bounds",
    "segment",
    "resolution",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return usage(format!("line {}: expected key=value, got `{line}`", lineno + 1));
            };
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return usage(format!("unknown key `{key}`"));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Result<Self> {
        self.set(key, value.to_string())?;
        Ok(self)
    }

    /// `other` wins on conflicts.
    pub fn merged(mut self, other: &Settings) -> Self {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .or_else(|e| usage(format!("bad value `{v}` for `{key}`: {e}"))),
        }
    }

    pub fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    /// A number, or `None` for the literal `declared` (or absence).
    pub fn number_or_declared(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None | Some("declared") => Ok(None),
            Some(_) => self.parsed(key),
        }
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Comma-separated reals.
    pub fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .or_else(|e| usage(format!("bad number `{t}` in `{key}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}
