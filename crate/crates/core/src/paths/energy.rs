//! Pair interaction energies of loop configurations.

use crate::extended::Extended;
use crate::lattice::{euclidean_norm, Site, SiteSet};

use super::particles::PathRef;
use super::skeleton::PathSkeleton;

/// A pair potential as a function of Euclidean distance, possibly `+∞`.
pub trait PairPotential {
    fn value(&self, r: f64) -> Extended;
}

/// `v ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ZeroPotential;

impl PairPotential for ZeroPotential {
    fn value(&self, _r: f64) -> Extended {
        Extended::ZERO
    }
}

/// `+∞` at distances up to `radius`, `strength` beyond it up to `range`,
/// 0 further out.
#[derive(Clone, Copy, Debug)]
pub struct HardCore {
    pub radius: f64,
    pub strength: f64,
    pub range: f64,
}

impl HardCore {
    /// Pure on-site exclusion.
    pub fn on_site() -> Self {
        HardCore { radius: 0.0, strength: 0.0, range: 0.0 }
    }
}

impl PairPotential for HardCore {
    fn value(&self, r: f64) -> Extended {
        if r <= self.radius {
            Extended::PosInf
        } else if r <= self.range {
            Extended::Finite(self.strength)
        } else {
            Extended::ZERO
        }
    }
}

impl<F: Fn(f64) -> Extended> PairPotential for F {
    fn value(&self, r: f64) -> Extended {
        self(r)
    }
}

/// Which of the three energies to evaluate.
#[derive(Clone, Copy, Debug)]
pub enum EnergyKind<'a> {
    /// `V`: every pair of distinct `β`-slots, aligned in time.
    Full,
    /// `V_K`: pairs of slots whose starting positions `ω(kβ)` lie in `K`.
    Slots(&'a SiteSet),
    /// `Ṽ_K`: time integral over pairs of distinct paths while both are in `K`.
    Occupation(&'a SiteSet),
}

/// One `β`-slot of a path: piecewise-constant on `[0, β)`, as
/// `(end time, site)` pieces.
struct Slot {
    pieces: Vec<(f64, Site)>,
}

fn slots_of(path: &PathSkeleton, beta: f64, filter: Option<&SiteSet>) -> Vec<Slot> {
    let count = (path.duration() / beta + 1e-9).floor() as usize;
    let mut out = Vec::new();
    let segs: Vec<_> = path.segments().collect();
    let mut s = 0;
    for k in 0..count {
        let lo = k as f64 * beta;
        let hi = lo + beta;
        while s < segs.len() && segs[s].to <= lo {
            s += 1;
        }
        if s >= segs.len() {
            break;
        }
        if let Some(kset) = filter {
            if !kset.contains(segs[s].site.coords()) {
                continue;
            }
        }
        let mut pieces = Vec::new();
        let mut i = s;
        while i < segs.len() && segs[i].from < hi {
            pieces.push((segs[i].to.min(hi) - lo, segs[i].site.clone()));
            i += 1;
        }
        if let Some(last) = pieces.last_mut() {
            last.0 = beta;
        }
        out.push(Slot { pieces });
    }
    out
}

fn slot_pair<V: PairPotential + ?Sized>(a: &Slot, b: &Slot, v: &V) -> Extended {
    let (mut i, mut j) = (0, 0);
    let mut from = 0.0;
    let mut total = Extended::ZERO;
    let mut diff = vec![0i32; a.pieces[0].1.dim()];
    while i < a.pieces.len() && j < b.pieces.len() {
        let to = a.pieces[i].0.min(b.pieces[j].0);
        if to > from {
            for (d, (x, y)) in diff.iter_mut().zip(a.pieces[i].1.coords().iter().zip(b.pieces[j].1.coords())) {
                *d = x - y;
            }
            total = total + v.value(euclidean_norm(&diff)).scale(to - from);
            if total == Extended::PosInf {
                return total;
            }
        }
        from = to;
        if a.pieces[i].0 <= to {
            i += 1;
        }
        if j < b.pieces.len() && b.pieces[j].0 <= to {
            j += 1;
        }
    }
    total
}

fn skeletons<'a>(p: &PathRef<'a>) -> (&'a PathSkeleton, Option<&'a PathSkeleton>) {
    match p {
        PathRef::Loop(l) => (l.skeleton(), None),
        PathRef::Window(w) => (w.forward(), Some(w.backward())),
    }
}

/// Interaction energy of a configuration of loops and windows.
///
/// For windows the slots are those of the forward part, counted from the
/// entrance into the window; the backward part never visits the window and
/// enters only `Ṽ_K` through its local times (which vanish on `K`).
pub fn interaction_energy<V: PairPotential + ?Sized>(
    paths: &[PathRef<'_>],
    v: &V,
    kind: EnergyKind<'_>,
    beta: f64,
) -> Extended {
    match kind {
        EnergyKind::Full | EnergyKind::Slots(_) => {
            let filter = match kind {
                EnergyKind::Slots(k) => Some(k),
                _ => None,
            };
            let slots: Vec<Slot> = paths.iter().flat_map(|p| slots_of(skeletons(p).0, beta, filter)).collect();
            let mut total = Extended::ZERO;
            for a in 0..slots.len() {
                for b in a + 1..slots.len() {
                    total = total + slot_pair(&slots[a], &slots[b], v);
                    if total == Extended::PosInf {
                        return total;
                    }
                }
            }
            total
        }
        EnergyKind::Occupation(k) => {
            let times: Vec<Vec<f64>> = paths
                .iter()
                .map(|p| {
                    let (f, b) = skeletons(p);
                    let mut lt = f.local_times_in(k);
                    if let Some(b) = b {
                        for (o, x) in lt.iter_mut().zip(b.local_times_in(k)) {
                            *o += x;
                        }
                    }
                    lt
                })
                .collect();
            let sites = k.sites();
            let mut total = Extended::ZERO;
            for i in 0..times.len() {
                for j in i + 1..times.len() {
                    for (x, lx) in sites.iter().zip(&times[i]) {
                        if *lx == 0.0 {
                            continue;
                        }
                        for (y, ly) in sites.iter().zip(&times[j]) {
                            if *ly == 0.0 {
                                continue;
                            }
                            let r = x.offset(&y.neg()).norm();
                            total = total + v.value(r).scale(lx * ly);
                        }
                    }
                    if total == Extended::PosInf {
                        return total;
                    }
                }
            }
            total.scale(0.5)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ModelParams;
    use crate::paths::{BridgeSampler, Loop};
    use crate::rng::{stream, ModuleTag};

    fn coulomb(r: f64) -> Extended {
        Extended::Finite(1.0 / (1.0 + r))
    }

    #[test]
    fn free_case_vanishes() {
        let a = Loop::constant(Site::origin(2), 3, 1.0).unwrap();
        let b = Loop::constant(Site::axis(2, 0, 1), 1, 1.0).unwrap();
        let refs = [PathRef::from(&a), PathRef::from(&b)];
        let k = SiteSet::cube(2, 2);
        for kind in [EnergyKind::Full, EnergyKind::Slots(&k), EnergyKind::Occupation(&k)] {
            assert_eq!(interaction_energy(&refs, &ZeroPotential, kind, 1.0), Extended::ZERO);
        }
    }

    #[test]
    fn single_winding_one_loop_has_no_pairs() {
        let a = Loop::constant(Site::origin(2), 1, 1.0).unwrap();
        assert_eq!(interaction_energy(&[PathRef::from(&a)], &coulomb, EnergyKind::Full, 1.0), Extended::ZERO);
    }

    #[test]
    fn two_constant_loops() {
        let beta = 1.7;
        let x = Site::new(&[0, 0, 0]);
        let y = Site::new(&[1, 2, 2]);
        let a = Loop::constant(x, 1, beta).unwrap();
        let b = Loop::constant(y, 1, beta).unwrap();
        let e = interaction_energy(&[PathRef::from(&a), PathRef::from(&b)], &coulomb, EnergyKind::Full, beta);
        assert!((e.finite().unwrap() - beta * 0.25).abs() < 1e-12);
    }

    /// Brute-force time grid: V = Σ over unordered slot pairs ∫_0^β v(...).
    #[test]
    fn full_energy_matches_time_grid() {
        let p = ModelParams::critical(2, 1.0).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let mut rng = stream(4, ModuleTag::Paths, 2, 0);
        let loops: Vec<Loop> = [2u64, 1, 3].iter().map(|&j| sampler.sample_loop(&Site::origin(2), j, &mut rng)).collect();
        let refs: Vec<PathRef> = loops.iter().map(PathRef::from).collect();
        let exact = interaction_energy(&refs, &coulomb, EnergyKind::Full, 1.0).finite().unwrap();
        let grid = 20_000;
        let mut approx = 0.0;
        let slots: Vec<(usize, u64)> =
            loops.iter().enumerate().flat_map(|(i, l)| (0..l.winding()).map(move |k| (i, k))).collect();
        for g in 0..grid {
            let t = (g as f64 + 0.5) / grid as f64;
            for a in 0..slots.len() {
                for b in a + 1..slots.len() {
                    let xa = loops[slots[a].0].skeleton().at(slots[a].1 as f64 + t);
                    let xb = loops[slots[b].0].skeleton().at(slots[b].1 as f64 + t);
                    approx += coulomb(xa.offset(&xb.neg()).norm()).finite().unwrap() / grid as f64;
                }
            }
        }
        assert!((exact - approx).abs() < 2e-3, "{exact} vs {approx}");
    }

    #[test]
    fn hard_core_is_infinite_without_overflow() {
        let a = Loop::constant(Site::origin(1), 1, 1.0).unwrap();
        let b = Loop::constant(Site::origin(1), 1, 1.0).unwrap();
        let refs = [PathRef::from(&a), PathRef::from(&b)];
        let k = SiteSet::point(Site::origin(1));
        assert_eq!(interaction_energy(&refs, &HardCore::on_site(), EnergyKind::Full, 1.0), Extended::PosInf);
        assert_eq!(interaction_energy(&refs, &HardCore::on_site(), EnergyKind::Occupation(&k), 1.0), Extended::PosInf);
        assert_eq!(Extended::PosInf.boltzmann_weight(), 0.0);
        let far = Loop::constant(Site::new(&[3]), 1, 1.0).unwrap();
        let refs = [PathRef::from(&a), PathRef::from(&far)];
        assert_eq!(interaction_energy(&refs, &HardCore::on_site(), EnergyKind::Full, 1.0), Extended::ZERO);
    }

    #[test]
    fn restricted_energies() {
        let beta = 1.0;
        let k = SiteSet::point(Site::origin(1));
        let a = Loop::constant(Site::origin(1), 2, beta).unwrap();
        let b = Loop::constant(Site::new(&[1]), 1, beta).unwrap();
        let refs = [PathRef::from(&a), PathRef::from(&b)];
        // V_K: only the two slots of `a` start in K; they sit at distance 0.
        let vk = interaction_energy(&refs, &coulomb, EnergyKind::Slots(&k), beta).finite().unwrap();
        assert!((vk - 1.0).abs() < 1e-12);
        // Ṽ_K: `b` never visits K, and self-pairs are excluded.
        let vt = interaction_energy(&refs, &coulomb, EnergyKind::Occupation(&k), beta).finite().unwrap();
        assert_eq!(vt, 0.0);
        let c = Loop::constant(Site::origin(1), 1, beta).unwrap();
        let refs = [PathRef::from(&a), PathRef::from(&c)];
        let vt = interaction_energy(&refs, &coulomb, EnergyKind::Occupation(&k), beta).finite().unwrap();
        assert!((vt - 0.5 * 2.0 * 1.0).abs() < 1e-12);
    }

    #[test]
    fn energies_are_shift_invariant() {
        let p = ModelParams::critical(2, 1.0).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let mut rng = stream(5, ModuleTag::Paths, 2, 0);
        let k = SiteSet::ball(2, 1.0);
        for _ in 0..20 {
            let a = sampler.sample_loop(&Site::origin(2), 3, &mut rng);
            let b = sampler.sample_loop(&Site::axis(2, 0, 1), 2, &mut rng);
            let before = interaction_energy(&[PathRef::from(&a), PathRef::from(&b)], &coulomb, EnergyKind::Occupation(&k), 1.0);
            let (sa, sb) = (a.shift(0.77), b.shift(1.31));
            let after = interaction_energy(&[PathRef::from(&sa), PathRef::from(&sb)], &coulomb, EnergyKind::Occupation(&k), 1.0);
            assert!((before.finite().unwrap() - after.finite().unwrap()).abs() < 1e-9);
            // Shifting both loops by the same multiple of β permutes the slots.
            let full = interaction_energy(&[PathRef::from(&a), PathRef::from(&b)], &coulomb, EnergyKind::Full, 1.0);
            let (ra, rb) = (a.shift(1.0), b.shift(1.0));
            let full_rot = interaction_energy(&[PathRef::from(&ra), PathRef::from(&rb)], &coulomb, EnergyKind::Full, 1.0);
            assert!((full.finite().unwrap() - full_rot.finite().unwrap()).abs() < 1e-9);
        }
    }
}
