//! Prints a default configuration file for every experiment, with each key
//! documented. `cargo run --example config_schema -- soup` prints only one.

use loopsoup::harness::config::COMMON_KEYS;
use loopsoup::harness::{experiments, EXPERIMENTS};

fn main() {
    let only = std::env::args().nth(1);
    for e in EXPERIMENTS.iter().filter(|e| only.as_deref().is_none_or(|o| o == **e)) {
        println!("experiment = {e}");
        for k in COMMON_KEYS.iter().chain(&experiments::keys(e).unwrap()) {
            println!("# {}\n{} = {}", k.help, k.name, k.default);
        }
        println!();
    }
}
