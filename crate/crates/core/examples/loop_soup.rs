//! Samples a subcritical loop soup on a 10^3 box, then reads off its
//! occupation field, the particles it places in a small window and their
//! hard-core interaction energy.

use loopsoup::lattice::Boundary;
use loopsoup::paths::{interaction_energy, particle_map, EnergyKind, HardCore, PathRef};
use loopsoup::rng::{stream, ModuleTag};
use loopsoup::{soup, thermo, LatticeBox, ModelParams, Site, SiteSet};

fn main() -> loopsoup::Result<()> {
    let p = ModelParams::new(3, 1.0, -0.2)?;
    let b = LatticeBox::new(3, 10, Boundary::Free)?;
    let mut rng = stream(7, ModuleTag::Soup, 0, 0);
    let s = soup::sample_soup(&b, &p, None, &mut rng)?;
    let longest = s.loops.iter().map(|l| l.winding()).max().unwrap_or(0);
    println!("{} loops, longest winding {longest}", s.loop_count());
    println!("mean density {:.4} (expected {:.4})", soup::mean_density(&s), thermo::rho(&p, p.mu(), 1e-10)?);
    let field = soup::occupation_field(&s);
    println!("occupation at the origin: {:.4}", field.at(&Site::origin(3)));

    let k = SiteSet::ball(3, 2.0);
    let refs: Vec<PathRef> = s.loops.iter().map(PathRef::from).collect();
    let particles = particle_map(&refs, &k, p.beta(), &mut rng);
    println!("{} particles in a ball of {} sites", particles.len(), k.len());
    let e = interaction_energy(&refs, &HardCore::on_site(), EnergyKind::Slots(&k), p.beta());
    println!("on-site hard-core energy in the window: {e:?}");
    Ok(())
}
