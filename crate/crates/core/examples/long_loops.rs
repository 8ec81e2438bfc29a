//! Long loops of the conditioned soup seen from a window K against random
//! interlacement trajectories: entrance law, visited sites and local time.

use loopsoup::interlacements::{equilibrium_solve, long_loop_vs_interlacement, theorem_config};
use loopsoup::lattice::Boundary;
use loopsoup::rng::{stream, ModuleTag};
use loopsoup::{LatticeBox, ModelParams, SiteSet};

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::critical(3, 1.0)?;
    let k = SiteSet::ball(3, 1.0);
    let eq = equilibrium_solve(&k, &p, 20.0)?;
    let cfg = theorem_config(LatticeBox::new(3, 12, Boundary::Free)?, 0.5, 3)?;
    let mut rng = stream(5, ModuleTag::Interlacements, 0, 0);
    let r = long_loop_vs_interlacement(&cfg, &p, &eq, 2_000, 40.0, &mut rng)?;
    println!("site, loop entries, trajectory entries, e_K/Cap");
    for (i, z) in k.sites().iter().enumerate() {
        println!(
            "{:?}, {}, {}, {:.4}",
            z.coords(),
            r.entry_counts_loops[i],
            r.entry_counts_interlacement[i],
            r.entry_law[i]
        );
    }
    println!("entry chi2 p = {:.3}", r.entry.p_value);
    println!("visited sites: means {:.3} vs {:.3}, KS p = {:.3}", r.visited_means.0, r.visited_means.1, r.visited.p_value);
    println!("local time at the centre: KS p = {:.3}", r.local_time.p_value);
    Ok(())
}
