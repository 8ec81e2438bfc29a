use rand::Rng;

use crate::lattice::{Site, SiteSet};

use super::skeleton::{Loop, PathSkeleton};
use super::window::TrajectoryWindow;

/// A loop or an interlacement window, for functionals of mixed
/// configurations.
#[derive(Clone, Copy, Debug)]
pub enum PathRef<'a> {
    Loop(&'a Loop),
    Window(&'a TrajectoryWindow),
}

impl<'a> From<&'a Loop> for PathRef<'a> {
    fn from(l: &'a Loop) -> Self {
        PathRef::Loop(l)
    }
}

impl<'a> From<&'a TrajectoryWindow> for PathRef<'a> {
    fn from(w: &'a TrajectoryWindow) -> Self {
        PathRef::Window(w)
    }
}

/// Positions at times `kβ + U` inside `[0, duration)` that lie in `K`.
fn read_particles(path: &PathSkeleton, beta: f64, u: f64, k: &SiteSet, out: &mut Vec<Site>) {
    let mut x = path.start().clone();
    let times = path.jump_times();
    let steps = path.steps();
    let mut next = 0;
    let mut slot = 0u64;
    loop {
        let t = u + slot as f64 * beta;
        if t >= path.duration() {
            break;
        }
        while next < times.len() && times[next] <= t {
            x.apply(steps[next]);
            next += 1;
        }
        if k.contains(x.coords()) {
            out.push(x.clone());
        }
        slot += 1;
    }
}

/// Particles of a configuration inside `K`.
///
/// Each path is re-anchored at its entrance into `K` (loops through their
/// canonical rotation, windows already are), shifted by an independent
/// `U ~ Uniform[0, β)`, and read at times `kβ + U`. A loop of winding `j`
/// yields `j` readings, so one lying entirely in `K` gives exactly `j`
/// particles.
pub fn particle_map<R: Rng + ?Sized>(paths: &[PathRef<'_>], k: &SiteSet, beta: f64, rng: &mut R) -> Vec<Site> {
    let mut out = Vec::new();
    for p in paths {
        let u = rng.random::<f64>() * beta;
        match p {
            PathRef::Loop(l) => match l.canonical_rep(k) {
                Ok(c) => read_particles(c.skeleton(), beta, u, k, &mut out),
                Err(_) => continue,
            },
            PathRef::Window(w) => read_particles(w.forward(), beta, u, k, &mut out),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::stats;
    use crate::kernels::ModelParams;
    use crate::paths::BridgeSampler;
    use crate::rng::{stream, ModuleTag};

    #[test]
    fn constant_loops_give_their_winding() {
        let mut rng = stream(1, ModuleTag::Paths, 1, 0);
        let k = SiteSet::ball(3, 1.0);
        let x = Site::axis(3, 1, 1);
        let one = Loop::constant(x.clone(), 1, 1.0).unwrap();
        assert_eq!(particle_map(&[PathRef::from(&one)], &k, 1.0, &mut rng), vec![x.clone()]);
        let five = Loop::constant(x.clone(), 5, 1.0).unwrap();
        assert_eq!(particle_map(&[PathRef::from(&five)], &k, 1.0, &mut rng), vec![x.clone(); 5]);
        let outside = Loop::constant(Site::axis(3, 0, 4), 2, 1.0).unwrap();
        assert!(particle_map(&[PathRef::from(&outside)], &k, 1.0, &mut rng).is_empty());
    }

    #[test]
    fn loops_inside_k_give_total_winding() {
        let p = ModelParams::critical(3, 0.2).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let mut rng = stream(2, ModuleTag::Paths, 1, 0);
        let k = SiteSet::cube(3, 30);
        let loops: Vec<Loop> = (1..=6).map(|j| sampler.sample_loop(&Site::origin(3), j, &mut rng)).collect();
        let refs: Vec<PathRef> = loops.iter().map(PathRef::from).collect();
        assert_eq!(particle_map(&refs, &k, 0.2, &mut rng).len(), 21);
    }

    #[test]
    fn particle_count_law_is_rotation_invariant() {
        let p = ModelParams::critical(3, 1.0).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let mut rng = stream(3, ModuleTag::Paths, 1, 0);
        let k = SiteSet::ball(3, 1.0);
        let n = 10_000;
        let mut plain = vec![0.0; 8];
        let mut rotated = vec![0.0; 8];
        for _ in 0..n {
            let l = sampler.sample_loop(&Site::axis(3, 0, 1), 4, &mut rng);
            let r = l.shift(0.37 * l.duration());
            let a = particle_map(&[PathRef::from(&l)], &k, 1.0, &mut rng).len();
            let b = particle_map(&[PathRef::from(&r)], &k, 1.0, &mut rng).len();
            plain[a.min(7)] += 1.0;
            rotated[b.min(7)] += 1.0;
        }
        let r = stats::chi_square_two_sample(&plain, &rotated).unwrap();
        assert!(r.p_value > 1e-3, "{r:?}");
    }
}
