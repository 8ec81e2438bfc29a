//! Path skeletons, random-walk bridges, loops and trajectory windows, with
//! the observables built on them: local times, shifts, `D_K`, canonical
//! rotations, the particle map and interaction energies.

mod bridge;
mod energy;
mod particles;
mod skeleton;
mod window;

pub(crate) use bridge::cycle_visits;
pub use bridge::{sample_bridge, uniform_order_statistics, BesselLaw, BridgeSampler};
pub use energy::{interaction_energy, EnergyKind, HardCore, PairPotential, ZeroPotential};
pub use particles::{particle_map, PathRef};
pub use skeleton::{canonical_rep, local_time, shift, Loop, PathSkeleton, Segment};
pub use window::TrajectoryWindow;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ModelParams;
    use crate::lattice::{Site, SiteSet};
    use crate::rng::{stream, ModuleTag};
    use rand::Rng;

    #[test]
    fn observables_are_shift_invariant_on_random_loops() {
        let p = ModelParams::critical(3, 1.0).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let mut rng = stream(11, ModuleTag::Paths, 3, 0);
        let k = SiteSet::ball(3, 1.0);
        for i in 0..100 {
            let j = 1 + i % 7;
            let l = sampler.sample_loop(&Site::axis(3, 1, 1), j, &mut rng);
            let s = rng.random::<f64>() * 3.0 * l.duration() - l.duration();
            let r = l.shift(s);
            for x in [Site::origin(3), Site::axis(3, 1, 1), Site::axis(3, 2, -1)] {
                assert!((l.local_time(&x) - r.local_time(&x)).abs() < 1e-9);
            }
            assert!((l.d_k(&k) - r.d_k(&k)).abs() < 1e-9);
            if l.hits(&k) && l.d_k(&k) < l.duration() {
                let a = l.canonical_rep(&k).unwrap();
                let b = r.canonical_rep(&k).unwrap();
                assert!((a.d_k(&k) - l.d_k(&k)).abs() < 1e-9);
                for t in [0.0, 0.3, 0.61] {
                    assert_eq!(a.skeleton().at(t * a.duration()), b.skeleton().at(t * b.duration()));
                }
            }
            let total: f64 = l.skeleton().local_times().values().sum();
            assert!((total - l.duration()).abs() < 1e-9 * l.duration());
        }
        let l = sampler.sample_loop(&Site::origin(3), 3, &mut rng);
        assert_eq!(l.shift(0.0), l);
        let full = l.shift(l.duration());
        for t in [0.1, 1.0, 2.5] {
            assert_eq!(full.skeleton().at(t), l.skeleton().at(t));
        }
    }
}
