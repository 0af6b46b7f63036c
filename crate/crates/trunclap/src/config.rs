//! Line-based `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key `{key}` given twice (first on line {first})")]
    Duplicate { key: String, line: usize, first: usize },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("{origin}: cannot read `{key}` = `{value}`: {message}")]
    Invalid { key: String, value: String, origin: String, message: String },
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    /// Source line, or `None` for values set programmatically or by flags.
    line: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

impl FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, found `{body}`") });
            };
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::Syntax { line, message: format!("invalid key `{key}`") });
            }
            if let Some(prev) = entries.get(key) {
                return Err(ConfigError::Duplicate { key: key.into(), line, first: prev.line.unwrap_or(0) });
            }
            entries.insert(key.into(), Entry { value: value.trim().into(), line: Some(line) });
        }
        Ok(Config { entries })
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        text.parse()
    }

    /// Sets or overrides a key; used for command-line flags.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.into(), Entry { value: value.to_string(), line: None });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// All entries in key order, for echoing into reports.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, e)| (k.as_str(), e.value.as_str()))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Error for a present key whose value is unusable.
    pub fn invalid(&self, key: &str, message: impl ToString) -> ConfigError {
        let e = &self.entries[key];
        let origin = match e.line {
            Some(l) => format!("line {l}"),
            None => "override".into(),
        };
        ConfigError::Invalid { key: key.into(), value: e.value.clone(), origin, message: message.to_string() }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| self.invalid(key, err)),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| ConfigError::Missing { key: key.into() })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Reads a number that may be written as a fraction, e.g. `h = 1/64`.
    pub fn number_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse_number(v).map_err(|m| self.invalid(key, m)),
        }
    }

    pub fn require_number(&self, key: &str) -> Result<f64, ConfigError> {
        match self.raw(key) {
            None => Err(ConfigError::Missing { key: key.into() }),
            Some(v) => parse_number(v).map_err(|m| self.invalid(key, m)),
        }
    }

    /// Comma-separated numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(v).map_err(|m| self.invalid(key, m)),
        }
    }

    /// Semicolon-separated groups of comma-separated numbers, e.g. `0.3,0; -0.3,0`.
    pub fn points(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                v.split(';').map(parse_list).collect::<Result<Vec<_>, _>>().map(Some).map_err(|m| self.invalid(key, m))
            }
        }
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("{e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err("not a finite number".into())
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let out = s.split(',').map(parse_number).collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        Err("empty list".into())
    } else {
        Ok(out)
    }
}
