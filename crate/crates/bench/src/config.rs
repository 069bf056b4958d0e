//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! seed = 7                 # top-level keys apply to every command
//!
//! [sweep-scaling]
//! d_grid = 16, 32, 64
//! modes = cached, naive
//! ```
//!
//! Section names match command names (`-` and `_` are interchangeable). Values in
//! a command's section override top-level ones, and `--set key=value` overrides
//! both. Keys a command does not read are rejected.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::error::{BenchError, BenchResult};

fn normalize(name: &str) -> String {
    name.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parsed file: top-level keys under the empty section name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> BenchResult<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    BenchError::Validation(format!("line {}: unterminated section header", k + 1))
                })?;
                current = normalize(name);
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                BenchError::Validation(format!("line {}: expected `key = value`, found {line:?}", k + 1))
            })?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(BenchError::Validation(format!("line {}: empty key", k + 1)));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(BenchError::Validation(format!("line {}: duplicate key {key:?}", k + 1)));
            }
        }
        Ok(ConfigFile { sections })
    }

    pub fn read(path: &std::path::Path) -> BenchResult<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Resolved key-value view for one command.
    pub fn params(&self, command: &str, overrides: &[String]) -> BenchResult<Params> {
        let mut values = BTreeMap::new();
        for section in ["", &normalize(command)] {
            if let Some(s) = self.sections.get(section) {
                values.extend(s.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| BenchError::Validation(format!("--set expects key=value, got {o:?}")))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Params {
            values,
            used: RefCell::new(BTreeSet::new()),
        })
    }
}

/// Typed access to one command's settings.
#[derive(Debug)]
pub struct Params {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> BenchResult<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| BenchError::Validation(format!("{key} = {raw:?}: {e}")))
}

impl Params {
    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> BenchResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map_or(Ok(default), |v| parse_value(key, v))
    }

    pub fn get_opt<T: FromStr>(&self, key: &str) -> BenchResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key).map(|v| parse_value(key, v)).transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> BenchResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get_opt(key)?
            .ok_or_else(|| BenchError::Validation(format!("missing required key {key:?}")))
    }

    /// Comma-separated list; an explicitly empty value is an error.
    pub fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> BenchResult<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.raw(key) else {
            return Ok(default);
        };
        let items: Vec<T> = raw
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_value(key, s))
            .collect::<BenchResult<_>>()?;
        if items.is_empty() {
            return Err(BenchError::Validation(format!("{key} must not be empty")));
        }
        Ok(items)
    }

    pub fn flag(&self, key: &str, default: bool) -> BenchResult<bool> {
        match self.raw(key).map(|v| v.trim().to_ascii_lowercase()) {
            None => Ok(default),
            Some(v) => match v.as_str() {
                "true" | "on" | "yes" | "1" => Ok(true),
                "false" | "off" | "no" | "0" => Ok(false),
                _ => Err(BenchError::Validation(format!("{key} = {v:?} is not a boolean"))),
            },
        }
    }

    /// Errors on keys that were supplied but never read.
    pub fn finish(&self) -> BenchResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Validation(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}
