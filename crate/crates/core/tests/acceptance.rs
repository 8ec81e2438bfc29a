//! The acceptance suite: every criterion runs through the harness with its
//! default configuration and prints one PASS/FAIL line. The process exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use loopsoup::harness::{self, ExperimentConfig};

const CRITERIA: &[(u32, &str, &str)] = &[
    (1, "soup", "density_identity"),
    (2, "thermo", "critical_density_routes"),
    (3, "thermo", "long_loop_tail"),
    (4, "soup", "exceedance_scaling"),
    (5, "bigjump", "big_jump"),
    (6, "capacity", "capacity"),
    (7, "interlace", "avoidance"),
    (8, "conditioned", "decomposition"),
    (9, "conditioned", "poisson_counts"),
    (10, "theorem1", "window_statistics"),
    (11, "hitting", "hitting"),
    (12, "conditioned", "tilting"),
];

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let out = tempfile::tempdir().expect("temporary directory");
    let mut failures = 0;
    for &(id, experiment, name) in CRITERIA.iter().filter(|c| only.is_empty() || only.contains(&c.0)) {
        let start = Instant::now();
        let mut config = ExperimentConfig::new(experiment);
        config.set("criteria", name).expect("valid key");
        let line = match harness::run_and_write(&config, out.path()) {
            Ok(record) => {
                let c = record.criteria.iter().find(|c| c.name == name).expect("criterion was run");
                failures += !c.passed as u32;
                c.line()
            }
            Err(e) => {
                failures += 1;
                format!("FAIL {name}: {e}")
            }
        };
        println!("[{id:>2}] {line} [{:.1} s]", start.elapsed().as_secs_f64());
    }
    if failures == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
