//! Equilibrium measure of B_1 by linear solve and Monte Carlo, then random
//! interlacements seen from B_1 and the avoidance probability.

use loopsoup::interlacements::{equilibrium_mc, equilibrium_solve, Horizons, InterlacementSampler};
use loopsoup::rng::{stream, ModuleTag};
use loopsoup::{ModelParams, SiteSet};

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::critical(3, 1.0)?;
    let k = SiteSet::ball(3, 1.0);
    let eq = equilibrium_solve(&k, &p, 20.0)?;
    let mut rng = stream(3, ModuleTag::Capacity, 0, 0);
    let mc = equilibrium_mc(&k, &p, 20_000, 10.0, &mut rng)?;
    println!("Cap(B_1): solve {:.5} ± {:.1e}, MC {:.5} ± {:.1e}", eq.capacity, eq.error, mc.capacity, mc.error);
    for (z, e) in k.sites().iter().zip(&eq.escape) {
        println!("  e({:?}) = {e:.5}", z.coords());
    }

    let u = 0.5;
    let mut sampler = InterlacementSampler::new(&eq, Horizons::default_for(&k))?;
    let draws = 5_000;
    let mut empty = 0;
    let mut visited = 0.0;
    for _ in 0..draws {
        let s = sampler.sample(u, &mut rng)?;
        empty += (s.count() == 0) as u32;
        visited += s.trajectories.iter().map(|w| w.local_times_in(&k).iter().filter(|&&t| t > 0.0).count()).sum::<usize>() as f64;
    }
    println!(
        "P(no trajectory hits B_1) at u = {u}: {:.4} (exp(-u Cap) = {:.4})",
        empty as f64 / draws as f64,
        (-u * eq.capacity).exp()
    );
    println!("mean sites of B_1 visited per draw: {:.3}", visited / draws as f64);
    println!("backward walks rejected: {}", sampler.backward_rejections());
    Ok(())
}
