//! Runs a harness experiment from code with a couple of overrides and
//! writes its tables to a temporary directory.

use loopsoup::harness::{self, ExperimentConfig};

fn main() -> loopsoup::Result<()> {
    let mut c = ExperimentConfig::new("interlace");
    c.set("draws", 2000)?;
    c.set("seed", 42)?;
    let out = std::env::temp_dir().join("loopsoup-example");
    let record = harness::run_and_write(&c, &out)?;
    for criterion in &record.criteria {
        println!("{}", criterion.line());
    }
    println!("config hash {}", record.config_hash);
    println!("tables in {}", out.display());
    Ok(())
}
