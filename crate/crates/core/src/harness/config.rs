//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys are lowercase words joined by `.` or `_`. Every experiment
//! declares its keys with defaults, so a resolved configuration lists every
//! parameter that influences a run and its hash identifies the run.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One documented configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

/// Keys accepted by every experiment.
pub const COMMON_KEYS: &[KeySpec] = &[
    KeySpec { name: "seed", default: "1", help: "master seed of all random streams" },
    KeySpec { name: "criteria", default: "all", help: "comma-separated criteria to run, or `all`" },
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    experiment: String,
    values: BTreeMap<String, String>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
        && k.starts_with(|c: char| c.is_ascii_lowercase())
}

fn valid_value(v: &str) -> bool {
    v == v.trim() && !v.contains(['\n', '\r', '#'])
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig { experiment: experiment.to_string(), values: BTreeMap::new() }
    }

    /// Parses the flat format. An `experiment = name` line, if present,
    /// names the experiment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut experiment = String::new();
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(Error::Config(format!("line {}: invalid key `{k}`", no + 1)));
            }
            if k == "experiment" {
                experiment = v.to_string();
                continue;
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{k}`", no + 1)));
            }
        }
        Ok(ExperimentConfig { experiment, values })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn experiment(&self) -> &str {
        &self.experiment
    }

    pub fn set_experiment(&mut self, name: &str) {
        self.experiment = name.to_string();
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        let value = value.to_string();
        if !valid_key(key) || key == "experiment" {
            return Err(Error::Config(format!("invalid key `{key}`")));
        }
        if !valid_value(&value) {
            return Err(Error::Config(format!("invalid value `{value}` for `{key}`")));
        }
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    /// Checks keys against `specs` and fills in defaults.
    pub fn resolve(&self, specs: &[KeySpec]) -> Result<Self> {
        let known = |k: &str| COMMON_KEYS.iter().chain(specs).any(|s| s.name == k);
        if let Some(k) = self.values.keys().find(|k| !known(k)) {
            return Err(Error::Config(format!("unknown key `{k}` for experiment `{}`", self.experiment)));
        }
        let mut out = self.clone();
        for s in COMMON_KEYS.iter().chain(specs) {
            out.values.entry(s.name.to_string()).or_insert_with(|| s.default.to_string());
        }
        Ok(out)
    }

    /// Canonical text: the experiment line, then keys in sorted order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.experiment.is_empty() {
            s.push_str(&format!("experiment = {}\n", self.experiment));
        }
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// SHA-256 of [`ExperimentConfig::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T> {
        let v = self.raw(key)?;
        v.parse().map_err(|_| Error::Config(format!("`{key}` must be {what}, got `{v}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let x: f64 = self.parsed(key, "a number")?;
        if x.is_nan() {
            return Err(Error::Config(format!("`{key}` must be a number")));
        }
        Ok(x)
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.raw(key)?;
        // Accept integral floats such as `1e6`.
        if let Ok(n) = v.parse::<u64>() {
            return Ok(n);
        }
        match v.parse::<f64>() {
            Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < 1.8e19 => Ok(x as u64),
            _ => Err(Error::Config(format!("`{key}` must be a non-negative integer, got `{v}`"))),
        }
    }

    /// A strictly positive count.
    pub fn count(&self, key: &str) -> Result<u64> {
        match self.u64(key)? {
            0 => Err(Error::Config(format!("`{key}` must be positive"))),
            n => Ok(n),
        }
    }

    pub fn u32(&self, key: &str) -> Result<u32> {
        u32::try_from(self.u64(key)?).map_err(|_| Error::Config(format!("`{key}` is too large")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.u32(key)? as usize)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.raw(key)
    }

    /// Comma-separated numbers.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.raw(key)?
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("`{key}` must be a list of numbers"))))
            .collect()
    }

    /// Comma-separated integers, read as a lattice site.
    pub fn i32_list(&self, key: &str) -> Result<Vec<i32>> {
        self.raw(key)?
            .split(',')
            .map(|s| s.trim().parse::<i32>().map_err(|_| Error::Config(format!("`{key}` must be a list of integers"))))
            .collect()
    }

    pub fn seed(&self) -> Result<u64> {
        self.u64("seed")
    }

    /// Whether criterion `name` is selected by the `criteria` key.
    pub fn selects(&self, name: &str) -> bool {
        match self.get("criteria") {
            None | Some("all") => true,
            Some(list) => list.split(',').any(|c| c.trim() == name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_garbage() {
        let c = ExperimentConfig::parse("# note\nexperiment = soup\n\nseed = 7\nsoup.n=10\n").unwrap();
        assert_eq!(c.experiment(), "soup");
        assert_eq!(c.u64("seed").unwrap(), 7);
        assert_eq!(c.u32("soup.n").unwrap(), 10);
        assert!(ExperimentConfig::parse("seed 7").is_err());
        assert!(ExperimentConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(ExperimentConfig::parse("Bad = 1").is_err());
    }

    #[test]
    fn resolve_fills_defaults_and_rejects_unknown_keys() {
        let specs = [KeySpec { name: "n", default: "4", help: "" }];
        let c = ExperimentConfig::parse("experiment = x\nn = 6").unwrap().resolve(&specs).unwrap();
        assert_eq!(c.get("seed"), Some("1"));
        assert_eq!(c.get("n"), Some("6"));
        assert!(ExperimentConfig::parse("m = 1").unwrap().resolve(&specs).is_err());
    }

    #[test]
    fn typed_getters() {
        let c = ExperimentConfig::parse("a = 1e6\nb = 0\nc = 0.5, 1\nd = 20,0,0\ne = x").unwrap();
        assert_eq!(c.u64("a").unwrap(), 1_000_000);
        assert!(c.count("b").is_err());
        assert_eq!(c.f64_list("c").unwrap(), vec![0.5, 1.0]);
        assert_eq!(c.i32_list("d").unwrap(), vec![20, 0, 0]);
        assert!(c.f64("e").is_err());
        assert!(c.selects("anything"));
    }

    #[test]
    fn hash_depends_on_content_only() {
        let a = ExperimentConfig::parse("experiment = t\nx = 1\ny = 2").unwrap();
        let b = ExperimentConfig::parse("y = 2\nexperiment = t\n# c\nx = 1").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::parse("experiment = t\nx = 1\ny = 3").unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
