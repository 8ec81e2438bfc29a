//! Experiment configuration, statistics and result records.

pub mod config;
pub mod experiments;
pub mod record;
pub mod stats;

use std::path::Path;
use std::time::Instant;

pub use config::{ExperimentConfig, KeySpec};
pub use experiments::EXPERIMENTS;
pub use record::{CriterionResult, ResultRecord, Table};

use crate::error::{Error, Result};

/// Resolves `config` against the schema of its experiment: unknown
/// experiments and keys are errors, missing keys take their defaults.
pub fn resolve(config: &ExperimentConfig) -> Result<ExperimentConfig> {
    let keys = experiments::keys(config.experiment())
        .ok_or_else(|| Error::Config(format!("unknown experiment `{}`", config.experiment())))?;
    config.resolve(&keys)
}

/// Runs the named experiment and returns its record.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord> {
    let resolved = resolve(config)?;
    let start = Instant::now();
    let outcome = experiments::dispatch(&resolved)?;
    if outcome.criteria.is_empty() && outcome.tables.is_empty() {
        return Err(Error::Config("the `criteria` key selects nothing".into()));
    }
    Ok(ResultRecord {
        experiment: resolved.experiment().to_string(),
        config_hash: resolved.hash(),
        config: resolved.values().clone(),
        criteria: outcome.criteria,
        tables: outcome.tables,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// [`run`], then writes the CSV tables and JSON summary to `out`.
pub fn run_and_write(config: &ExperimentConfig, out: &Path) -> Result<ResultRecord> {
    let record = run(config)?;
    record.write(out)?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_thermo() -> ExperimentConfig {
        let mut c = ExperimentConfig::new("thermo");
        c.set("grid.points", 5).unwrap();
        c
    }

    #[test]
    fn unknown_experiment_and_zero_replicas_are_config_errors() {
        assert!(matches!(run(&ExperimentConfig::new("nope")), Err(Error::Config(_))));
        let mut c = ExperimentConfig::new("soup");
        c.set("density.replicas", 0).unwrap();
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let mut c = ExperimentConfig::new("thermo");
        c.set("bogus", 1).unwrap();
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn thermo_runs_and_hash_matches_config() {
        let c = quick_thermo();
        let r = run(&c).unwrap();
        assert!(r.passed(), "{:#?}", r.criteria);
        assert_eq!(r.config_hash, resolve(&c).unwrap().hash());
        assert_eq!(r.tables[0].rows.len(), 5);
    }

    #[test]
    fn runs_replay_identically() {
        let mut c = ExperimentConfig::new("soup");
        c.set("criteria", "density_identity").unwrap();
        c.set("density.replicas", 20).unwrap();
        c.set("density.n", 4).unwrap();
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert!(a.same_outcome(&b));
        c.set("seed", 2).unwrap();
        assert!(!a.same_outcome(&run(&c).unwrap()));
    }

    #[test]
    fn every_experiment_has_a_schema() {
        for e in EXPERIMENTS {
            let keys = experiments::keys(e).unwrap();
            let mut names: Vec<_> = keys.iter().map(|k| k.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), keys.len(), "{e}");
        }
    }
}
