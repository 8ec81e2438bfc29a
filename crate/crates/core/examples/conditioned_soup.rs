//! The critical soup conditioned on a supercritical density: exact rejection
//! draws against the long-loop decomposition on a 6^3 box.

use loopsoup::conditioned::{self, ConditionedConfig, DecomposedSampler, LongLoopMode};
use loopsoup::harness::stats;
use loopsoup::lattice::Boundary;
use loopsoup::rng::{stream, ModuleTag};
use loopsoup::{thermo, LatticeBox, ModelParams, Site};

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::critical(3, 1.0)?;
    let rho_c = thermo::critical_density(&p, 1e-12)?;
    let rho_eps = 3.0;
    let b = LatticeBox::new(3, 6, Boundary::Free)?;
    let o = Site::origin(3);
    let draws = 500;

    let mut rng = stream(1, ModuleTag::Conditioned, 0, 0);
    let mut attempts = 0;
    let mut rejection = Vec::new();
    for _ in 0..draws {
        let d = conditioned::rejection_conditioned_sample(&b, &p, rho_c + rho_eps, None, &mut rng, 100_000_000)?;
        attempts += d.attempts;
        rejection.push(d.sample.loops.iter().map(|l| l.local_time(&o)).sum::<f64>());
    }
    println!("rejection: acceptance rate {:.2e}", draws as f64 / attempts as f64);

    let cfg = ConditionedConfig::new(b.clone(), rho_eps, 1, LongLoopMode::OnePerBox)?;
    let mut s = DecomposedSampler::new(&cfg, &p)?;
    let decomposed: Vec<f64> = (0..draws).map(|_| s.sample(&mut rng).local_time(&o)).collect();
    println!("Z_box = {:.4e}", conditioned::z_lambda(&p, &b, rho_eps)?);
    println!(
        "mean local time at the corner: rejection {:.4}, decomposed {:.4}",
        stats::mean_and_se(&rejection)?.mean,
        stats::mean_and_se(&decomposed)?.mean
    );
    println!("two-sample KS: {:?}", stats::ks_two_sample(&rejection, &decomposed)?);
    Ok(())
}
