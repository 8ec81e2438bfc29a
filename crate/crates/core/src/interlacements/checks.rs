//! Comparisons tying the interlacement to walks and long loops.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::conditioned::{ConditionedConfig, DecomposedSampler, LongLoopMode};
use crate::error::{Error, Result};
use crate::harness::stats::{self, Estimate, TestResult};
use crate::kernels::{self, ModelParams};
use crate::lattice::{Site, SiteSet, Step};
use crate::paths::PathSkeleton;
use crate::quad;

use super::equilibrium::{dist2, EquilibriumData};
use super::sampler::{Horizons, InterlacementSampler};

/// Monte Carlo hitting probability against its large-distance prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingReport {
    /// `P_x(ω(H_K) = z, H_K ∈ [t1, t2])`.
    pub estimate: Estimate,
    /// `e_K(z) ∫_{t1}^{t2} p_t(x − z) dt`.
    pub prediction: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

/// Walks from `x` until they enter `K`. Only the jump chain is simulated: the
/// entrance at jump `n` happens at a `Gamma(n, 1)` time, and chains are cut
/// once `n` is so large that `P(Gamma(n, 1) ≤ t2) < 1e-15`.
pub fn hitting_asymptotics_check<R: Rng + ?Sized>(
    eq: &EquilibriumData,
    z: &Site,
    x: &Site,
    t_window: (f64, f64),
    n_samples: u64,
    rng: &mut R,
) -> Result<HittingReport> {
    let k = &eq.window;
    let e_z = eq.escape_at(z).ok_or_else(|| Error::InvalidParameter("z must lie in K".into()))?;
    x.check_dim(k.dim())?;
    if k.contains(x.coords()) {
        return Err(Error::InvalidParameter("starting point must lie outside K".into()));
    }
    let (t1, t2) = t_window;
    if !(0.0 <= t1 && t1 < t2 && t2.is_finite()) || n_samples == 0 {
        return Err(Error::InvalidParameter(format!("invalid window [{t1}, {t2}] or sample count")));
    }
    let d = k.dim();
    let n_max = (t2 + 9.0 * t2.sqrt() + 60.0).ceil() as u64;
    let centre = k.center();
    let near2 = (k.radius() + 1.0).powi(2);
    let mut hits = 0u64;
    for _ in 0..n_samples {
        let mut y = x.clone();
        for n in 1..=n_max {
            y.apply(Step::random(d, rng));
            if dist2(&y, &centre) <= near2 && k.contains(y.coords()) {
                if &y == z {
                    let t = Gamma::new(n as f64, 1.0).expect("positive shape").sample(rng);
                    hits += (t1..=t2).contains(&t) as u64;
                }
                break;
            }
        }
    }
    let estimate = stats::proportion(hits, n_samples)?;
    let offset: Vec<i32> = x.coords().iter().zip(z.coords()).map(|(a, b)| a - b).collect();
    let panels = ((t2 - t1) / 25.0).ceil().max(4.0) as usize;
    let prediction = e_z * quad::integrate_uniform(t1, t2, panels, |t| kernels::kernel(d, t, &offset));
    Ok(HittingReport {
        estimate,
        prediction,
        ratio: estimate.mean / prediction,
        ratio_se: estimate.std_err / prediction,
    })
}

/// Window observables of the long-loop layer against interlacement
/// trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongLoopComparison {
    pub loops: usize,
    pub trajectories: usize,
    /// Observation time after the entrance.
    pub observe_time: f64,
    /// Entry counts per site of `K`, loops then trajectories.
    pub entry_counts_loops: Vec<f64>,
    pub entry_counts_interlacement: Vec<f64>,
    /// `e_K(z) / Cap(K)`.
    pub entry_law: Vec<f64>,
    pub entry: TestResult,
    /// Number of distinct sites of `K` visited in `[0, observe_time)`.
    pub visited: TestResult,
    /// Local time at the centre of `K` in `[0, observe_time)`.
    pub local_time: TestResult,
    /// `D_K` truncated at `observe_time`.
    pub d_k: TestResult,
    /// Mean visited-site counts, loops then trajectories.
    pub visited_means: (f64, f64),
}

struct WindowObservation {
    entry: usize,
    visited: f64,
    local_time: f64,
    d_k: f64,
}

fn observe(path: &PathSkeleton, k: &SiteSet, mark: &Site, t_obs: f64, d_k: f64) -> WindowObservation {
    let entry = k.index_of(path.at(0.0).coords()).expect("canonical parametrisation starts in K");
    let mut seen = vec![false; k.len()];
    let mut local_time = 0.0;
    for seg in path.segments() {
        if seg.from >= t_obs {
            break;
        }
        if let Some(i) = k.index_of(seg.site.coords()) {
            seen[i] = true;
        }
        if &seg.site == mark {
            local_time += seg.to.min(t_obs) - seg.from;
        }
    }
    WindowObservation {
        entry,
        visited: seen.iter().filter(|&&s| s).count() as f64,
        local_time,
        d_k: d_k.min(t_obs),
    }
}

/// Collects `n_loops` long loops hitting `K` from the decomposed ensemble of
/// `config`, re-anchored at their canonical entrance, and as many
/// interlacement trajectories in `K`, and compares window statistics over
/// `[0, observe_time)`. The interlacement level only scales the trajectory
/// count, so trajectories are drawn directly from `Q^K / Cap(K)`.
pub fn long_loop_vs_interlacement<R: Rng + ?Sized>(
    config: &ConditionedConfig,
    params: &ModelParams,
    eq: &EquilibriumData,
    n_loops: usize,
    observe_time: f64,
    rng: &mut R,
) -> Result<LongLoopComparison> {
    let k = &eq.window;
    if k.sites().iter().any(|z| !config.central().contains(z.coords())) {
        return Err(Error::InvalidParameter("K must lie in the central box".into()));
    }
    if n_loops == 0 || !(observe_time > 0.0) {
        return Err(Error::InvalidParameter("need a positive loop count and observation time".into()));
    }
    let mark = k.center();
    let mut sampler = DecomposedSampler::new(config, params)?;
    let mut loop_obs = Vec::with_capacity(n_loops);
    while loop_obs.len() < n_loops {
        for l in sampler.long_loops_hitting(k, rng) {
            if loop_obs.len() == n_loops {
                break;
            }
            let rep = l.canonical_rep(k)?;
            let dk = rep.d_k(k);
            loop_obs.push(observe(rep.skeleton(), k, &mark, observe_time, dk));
        }
    }
    let horizons = Horizons::new(observe_time, observe_time)?;
    let mut inter = InterlacementSampler::new(eq, horizons)?;
    let traj_obs: Vec<WindowObservation> = (0..n_loops)
        .map(|_| {
            let w = inter.sample_trajectory(rng);
            let dk = w.d_k(k);
            observe(w.forward(), k, &mark, observe_time, dk)
        })
        .collect();

    let tally = |obs: &[WindowObservation]| {
        let mut c = vec![0.0; k.len()];
        for o in obs {
            c[o.entry] += 1.0;
        }
        c
    };
    let entry_counts_loops = tally(&loop_obs);
    let entry_counts_interlacement = tally(&traj_obs);
    // Sites without escape mass are never entries of either sample.
    let (a, b): (Vec<f64>, Vec<f64>) = entry_counts_loops
        .iter()
        .zip(&entry_counts_interlacement)
        .filter(|(x, y)| **x + **y > 0.0)
        .map(|(x, y)| (*x, *y))
        .unzip();
    let entry = stats::chi_square_two_sample(&a, &b)?;
    let column = |obs: &[WindowObservation], f: fn(&WindowObservation) -> f64| obs.iter().map(f).collect::<Vec<f64>>();
    let v_loops = column(&loop_obs, |o| o.visited);
    let v_traj = column(&traj_obs, |o| o.visited);
    Ok(LongLoopComparison {
        loops: loop_obs.len(),
        trajectories: traj_obs.len(),
        observe_time,
        entry_law: eq.escape.iter().map(|e| e / eq.capacity).collect(),
        entry,
        visited: stats::ks_two_sample(&v_loops, &v_traj)?,
        local_time: stats::ks_two_sample(&column(&loop_obs, |o| o.local_time), &column(&traj_obs, |o| o.local_time))?,
        d_k: stats::ks_two_sample(&column(&loop_obs, |o| o.d_k), &column(&traj_obs, |o| o.d_k))?,
        visited_means: (stats::mean_and_se(&v_loops)?.mean, stats::mean_and_se(&v_traj)?.mean),
        entry_counts_loops,
        entry_counts_interlacement,
    })
}

/// Convenience: the default one-loop-per-box configuration.
pub fn theorem_config(central: crate::lattice::LatticeBox, rho_eps: f64, grid_side: u32) -> Result<ConditionedConfig> {
    ConditionedConfig::new(central, rho_eps, grid_side, LongLoopMode::OnePerBox)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interlacements::equilibrium_solve;
    use crate::lattice::{Boundary, LatticeBox};
    use crate::rng::{stream, ModuleTag};

    fn p3() -> ModelParams {
        ModelParams::critical(3, 1.0).unwrap()
    }

    #[test]
    fn hitting_ratio_is_symmetric_and_close_to_one() {
        let p = p3();
        let k = SiteSet::point(Site::origin(3));
        let eq = equilibrium_solve(&k, &p, 16.0).unwrap();
        let mut rng = stream(1, ModuleTag::Hitting, 0, 0);
        let x = Site::new(&[6, 0, 0]);
        let a = hitting_asymptotics_check(&eq, &Site::origin(3), &x, (18.0, 72.0), 100_000, &mut rng).unwrap();
        let b = hitting_asymptotics_check(&eq, &Site::origin(3), &x.neg(), (18.0, 72.0), 100_000, &mut rng).unwrap();
        assert!((a.ratio - b.ratio).abs() < 3.0 * (a.ratio_se.powi(2) + b.ratio_se.powi(2)).sqrt());
        assert!((a.ratio - 1.0).abs() < 0.3, "{a:?}");
        assert!(hitting_asymptotics_check(&eq, &Site::origin(3), &Site::origin(3), (1.0, 2.0), 10, &mut rng).is_err());
    }

    #[test]
    fn long_loops_and_trajectories_agree_on_a_small_grid() {
        let p = p3();
        let k = SiteSet::point(Site::origin(3));
        let eq = equilibrium_solve(&k, &p, 16.0).unwrap();
        let cfg = theorem_config(LatticeBox::new(3, 8, Boundary::Free).unwrap(), 0.5, 3).unwrap();
        let mut rng = stream(2, ModuleTag::Interlacements, 0, 0);
        let r = long_loop_vs_interlacement(&cfg, &p, &eq, 1500, 20.0, &mut rng).unwrap();
        assert_eq!(r.loops, 1500);
        assert_eq!(r.entry_counts_loops, vec![1500.0]);
        assert!(r.local_time.p_value > 1e-3, "{r:?}");
    }
}
