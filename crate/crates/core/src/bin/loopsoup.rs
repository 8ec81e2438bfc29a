use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use loopsoup::harness::{self, ExperimentConfig};
use loopsoup::Error;

/// Runs one experiment and reports its criteria.
///
/// Exit status: 0 when every asserted criterion passes, 1 on a failure,
/// 2 on a configuration error.
#[derive(Parser, Debug)]
#[command(name = "loopsoup", version)]
struct Cli {
    /// thermo, soup, conditioned, capacity, interlace, theorem1, bigjump or hitting
    experiment: String,

    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,

    /// Directory for the CSV tables and JSON summary.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::Supercritical { .. })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let mut config = match ExperimentConfig::from_file(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if !config.experiment().is_empty() && config.experiment() != cli.experiment {
        eprintln!("config names experiment `{}` but `{}` was requested", config.experiment(), cli.experiment);
        return ExitCode::from(2);
    }
    config.set_experiment(&cli.experiment);
    if let Some(seed) = cli.seed {
        config.set("seed", seed).expect("seed is a valid value");
    }
    match harness::run_and_write(&config, &cli.out) {
        Ok(record) => {
            for c in &record.criteria {
                println!("{}", c.line());
            }
            println!("config {} written to {}", record.config_hash, cli.out.display());
            if record.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
