//! Resolved run configuration: flag values overridden by an optional `key = value` file.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::Failure;

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    allowed: Vec<&'static str>,
}

pub const GLOBAL_KEYS: &[&str] = &["seed", "output_dir", "format", "jobs", "rtol", "atol", "stop_threshold"];

impl Params {
    pub fn new(allowed: &[&'static str]) -> Self {
        let mut a: Vec<&'static str> = GLOBAL_KEYS.to_vec();
        a.extend_from_slice(allowed);
        Params { values: BTreeMap::new(), allowed: a }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(self.allowed.contains(&key), "{key}");
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Failure::usage(format!("config line {}: expected key = value", n + 1)));
            };
            let key = k.trim().replace('-', "_");
            if !self.allowed.contains(&key.as_str()) {
                return Err(Failure::usage(format!("config line {}: unknown key {key:?}", n + 1)));
            }
            self.values.insert(key, v.trim().to_string());
        }
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| Failure::usage(format!("invalid {key} {v:?}: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| Failure::usage(format!("missing required parameter {key}")))
    }

    pub fn flag(&self, key: &str) -> Result<bool, Failure> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}
