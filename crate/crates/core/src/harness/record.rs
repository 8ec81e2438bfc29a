//! Result records and their CSV / JSON output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Per-replica observables of one criterion, written as a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Outcome of one criterion. `passed` is computed from `values` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    /// Report-only entries do not affect the exit status.
    pub asserted: bool,
    pub passed: bool,
    pub values: BTreeMap<String, f64>,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(name: &str, asserted: bool) -> Self {
        CriterionResult { name: name.to_string(), asserted, passed: false, values: BTreeMap::new(), detail: String::new() }
    }

    pub fn value(mut self, key: &str, x: f64) -> Self {
        self.values.insert(key.to_string(), x);
        self
    }

    pub fn set(&mut self, key: &str, x: f64) {
        self.values.insert(key.to_string(), x);
    }

    pub fn get(&self, key: &str) -> f64 {
        self.values.get(key).copied().unwrap_or(f64::NAN)
    }

    /// One line: status, name and the recorded numbers.
    pub fn line(&self) -> String {
        let status = match (self.asserted, self.passed) {
            (false, _) => "INFO",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        let values: Vec<String> = self.values.iter().map(|(k, v)| format!("{k}={v:.6}")).collect();
        let mut s = format!("{status} {}: {}", self.name, values.join(" "));
        if !self.detail.is_empty() {
            s.push_str(&format!(" ({})", self.detail));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub criteria: Vec<CriterionResult>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    /// Wall-clock metadata, ignored by [`ResultRecord::same_outcome`].
    pub elapsed_seconds: f64,
}

impl ResultRecord {
    /// All asserted criteria passed.
    pub fn passed(&self) -> bool {
        self.criteria.iter().filter(|c| c.asserted).all(|c| c.passed)
    }

    /// Equality of everything except wall-clock metadata.
    pub fn same_outcome(&self, other: &ResultRecord) -> bool {
        self.experiment == other.experiment
            && self.config_hash == other.config_hash
            && self.config == other.config
            && self.criteria == other.criteria
            && self.tables == other.tables
    }

    /// Writes `<experiment>_<table>.csv` for every table and
    /// `<experiment>.json` with the summary.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            t.write_csv(&dir.join(format!("{}_{}.csv", self.experiment, t.name)))?;
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(format!("{}.json", self.experiment)), json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_csv_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("draws", &["replica", "x"]);
        t.push(vec![0.0, 1.5]);
        let c = CriterionResult::new("demo", true).value("x", 1.5);
        let r = ResultRecord {
            experiment: "demo".into(),
            config_hash: "h".into(),
            config: BTreeMap::new(),
            criteria: vec![c],
            tables: vec![t],
            elapsed_seconds: 0.0,
        };
        r.write(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("demo_draws.csv")).unwrap();
        assert_eq!(csv, "replica,x\n0,1.5\n");
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("demo.json")).unwrap()).unwrap();
        assert_eq!(json["criteria"][0]["values"]["x"], 1.5);
        assert!(!r.passed());
    }
}
