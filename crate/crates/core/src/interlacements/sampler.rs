//! Random interlacements restricted to a finite window.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ModelParams;
use crate::lattice::{Site, SiteSet, Step};
use crate::paths::{PathSkeleton, TrajectoryWindow};
use crate::soup::poisson;

use super::equilibrium::EquilibriumData;

/// Simulated time on each side of the entrance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizons {
    pub forward: f64,
    pub backward: f64,
}

impl Horizons {
    pub fn new(forward: f64, backward: f64) -> Result<Self> {
        if !(forward > 0.0 && backward > 0.0) || !forward.is_finite() || !backward.is_finite() {
            return Err(Error::InvalidParameter(format!("horizons must be positive and finite, got {forward}, {backward}")));
        }
        Ok(Horizons { forward, backward })
    }

    /// `20 · diam(K)²` each way (diameter at least 1).
    pub fn default_for(k: &SiteSet) -> Self {
        let t = 20.0 * k.diameter().max(1.0).powi(2);
        Horizons { forward: t, backward: t }
    }
}

/// Bound on the probability that a walk started anywhere returns to `K`
/// after time `t`: `|K| ∫_t^∞ p_s(0) ds ≤ |K| (d/2π)^{d/2} t^{1−d/2} / (d/2 − 1)`.
pub fn late_return_bound(k: &SiteSet, t: f64) -> f64 {
    let d = k.dim() as f64;
    let c1 = (d / (2.0 * std::f64::consts::PI)).powf(d / 2.0);
    (k.len() as f64 * c1 * t.powf(1.0 - d / 2.0) / (d / 2.0 - 1.0)).min(1.0)
}

/// A draw of the interlacement at level `u` seen from `K`.
#[derive(Debug, Clone)]
pub struct InterlacementSample {
    pub level: f64,
    pub window: SiteSet,
    pub trajectories: Vec<TrajectoryWindow>,
    pub horizons: Horizons,
    /// Per-trajectory bound on the probability that the backward part would
    /// return to `K` after its horizon.
    pub residual_bound: f64,
}

impl InterlacementSample {
    pub fn count(&self) -> usize {
        self.trajectories.len()
    }
}

/// Samples trajectories of `Q^K`: entry `z` with probability `e_K(z)/Cap(K)`,
/// an unconditioned forward walk from `z` and a backward walk from `z`
/// conditioned (by rejection within its horizon) never to return to `K`.
#[derive(Debug, Clone)]
pub struct InterlacementSampler {
    eq: EquilibriumData,
    cdf: Vec<f64>,
    horizons: Horizons,
    near2: f64,
    centre: Site,
    backward_rejections: u64,
}

impl InterlacementSampler {
    pub fn new(eq: &EquilibriumData, horizons: Horizons) -> Result<Self> {
        if !(eq.capacity > 0.0) {
            return Err(Error::InvalidParameter("window has zero capacity".into()));
        }
        let mut acc = 0.0;
        let cdf = eq
            .escape
            .iter()
            .map(|e| {
                acc += e;
                acc / eq.capacity
            })
            .collect();
        Ok(InterlacementSampler {
            eq: eq.clone(),
            cdf,
            horizons,
            near2: (eq.window.radius() + 1.0).powi(2),
            centre: eq.window.center(),
            backward_rejections: 0,
        })
    }

    pub fn equilibrium(&self) -> &EquilibriumData {
        &self.eq
    }

    pub fn horizons(&self) -> Horizons {
        self.horizons
    }

    /// Backward walks discarded so far for returning to `K`.
    pub fn backward_rejections(&self) -> u64 {
        self.backward_rejections
    }

    pub fn residual_bound(&self) -> f64 {
        late_return_bound(&self.eq.window, self.horizons.backward)
    }

    pub fn sample_entry<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.eq.window.sites()[i].clone()
    }

    /// One trajectory of `Q^K / Cap(K)`.
    pub fn sample_trajectory<R: Rng + ?Sized>(&mut self, rng: &mut R) -> TrajectoryWindow {
        let z = self.sample_entry(rng);
        let forward = ct_walk(&z, self.horizons.forward, rng);
        let backward = loop {
            match self.escaping_walk(&z, rng) {
                Some(b) => break b,
                None => self.backward_rejections += 1,
            }
        };
        TrajectoryWindow::new(self.eq.window.clone(), forward, backward)
            .expect("sampled trajectory satisfies the window invariants")
    }

    /// Jump at time 0 out of `z`, then a rate-one walk for the backward
    /// horizon; `None` if it visits `K`.
    fn escaping_walk<R: Rng + ?Sized>(&self, z: &Site, rng: &mut R) -> Option<PathSkeleton> {
        let d = z.dim();
        let k = &self.eq.window;
        let mut y = z.clone();
        let mut times = vec![0.0];
        let first = Step::random(d, rng);
        y.apply(first);
        if k.contains(y.coords()) {
            return None;
        }
        let mut steps = vec![first];
        let mut t: f64 = rng.sample(Exp1);
        while t < self.horizons.backward {
            let s = Step::random(d, rng);
            y.apply(s);
            if super::equilibrium::dist2(&y, &self.centre) <= self.near2 && k.contains(y.coords()) {
                return None;
            }
            times.push(t);
            steps.push(s);
            t += rng.sample::<f64, _>(Exp1);
        }
        Some(PathSkeleton::from_parts_unchecked(z.clone(), times, steps, self.horizons.backward))
    }

    /// The point process at level `u`: `Poisson(u Cap(K))` trajectories.
    pub fn sample<R: Rng + ?Sized>(&mut self, u: f64, rng: &mut R) -> Result<InterlacementSample> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::InvalidParameter(format!("level must be >= 0, got {u}")));
        }
        let n = poisson(u * self.eq.capacity, rng);
        let trajectories = (0..n).map(|_| self.sample_trajectory(rng)).collect();
        Ok(InterlacementSample {
            level: u,
            window: self.eq.window.clone(),
            trajectories,
            horizons: self.horizons,
            residual_bound: self.residual_bound(),
        })
    }
}

/// Rate-one walk from `x` on `[0, horizon)`, holding at `x` first.
pub fn ct_walk<R: Rng + ?Sized>(x: &Site, horizon: f64, rng: &mut R) -> PathSkeleton {
    let d = x.dim();
    let mut times = Vec::new();
    let mut steps = Vec::new();
    let mut t: f64 = rng.sample(Exp1);
    while t < horizon {
        times.push(t);
        steps.push(Step::random(d, rng));
        t += rng.sample::<f64, _>(Exp1);
    }
    PathSkeleton::from_parts_unchecked(x.clone(), times, steps, horizon)
}

/// Draw of the interlacement at level `u` in the window of `eq`.
pub fn sample_interlacements<R: Rng + ?Sized>(
    eq: &EquilibriumData,
    u: f64,
    params: &ModelParams,
    horizons: Horizons,
    rng: &mut R,
) -> Result<InterlacementSample> {
    if eq.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: eq.dim() });
    }
    InterlacementSampler::new(eq, horizons)?.sample(u, rng)
}
