//! Exact sampling of continuous-time simple random walk bridges.
//!
//! Coordinates of the rate-one walk on `Z^d` are independent rate-`1/d`
//! walks, so a bridge of duration `t` factorises: along each axis the number
//! `m` of `+` jumps (equal to the number of `−` jumps) has the Bessel law
//! `P(m) ∝ (z/2)^{2m} / (m!)²` with `z = t/d`. Given these counts the order of
//! the jumps is a uniform shuffle of the multiset and the jump times are
//! uniform order statistics on `[0, t)`, independent of the order.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::kernels::ModelParams;
use crate::lattice::{Site, SiteSet, Step};

use super::skeleton::{Loop, PathSkeleton};

/// Inverse-CDF table of the Bessel law at one value of `z`.
#[derive(Clone, Debug)]
pub struct BesselLaw {
    first: u64,
    cdf: Vec<f64>,
}

impl BesselLaw {
    pub fn new(z: f64) -> Self {
        if z <= 0.0 {
            return BesselLaw { first: 0, cdf: vec![1.0] };
        }
        let q = 0.25 * z * z;
        let mode = ((0.25 + q).sqrt() - 0.5).floor().max(0.0) as u64;
        // Weights relative to the mode, walking out until negligible.
        let mut up = vec![1.0];
        let mut w = 1.0;
        let mut m = mode;
        loop {
            w *= q / (((m + 1) * (m + 1)) as f64);
            if w < 1e-18 {
                break;
            }
            up.push(w);
            m += 1;
        }
        let mut down = Vec::new();
        let mut w = 1.0;
        let mut m = mode;
        while m > 0 {
            w *= (m * m) as f64 / q;
            if w < 1e-18 {
                break;
            }
            down.push(w);
            m -= 1;
        }
        let first = mode - down.len() as u64;
        let mut weights: Vec<f64> = down.into_iter().rev().collect();
        weights.extend(up);
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        BesselLaw { first, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c < u).min(self.cdf.len() - 1);
        self.first + i as u64
    }

    /// `P(m)` from the table.
    pub fn pmf(&self, m: u64) -> f64 {
        if m < self.first {
            return 0.0;
        }
        let i = (m - self.first) as usize;
        match i {
            0 => self.cdf[0],
            _ if i < self.cdf.len() => self.cdf[i] - self.cdf[i - 1],
            _ => 0.0,
        }
    }
}

/// Bridge sampler for a fixed dimension and `β`, caching the Bessel tables of
/// short loops.
#[derive(Clone, Debug)]
pub struct BridgeSampler {
    d: usize,
    beta: f64,
    cache: HashMap<u64, BesselLaw>,
}

/// Windings up to this value keep their tables.
const CACHE_WINDINGS: u64 = 4096;

impl BridgeSampler {
    pub fn new(params: &ModelParams) -> Self {
        BridgeSampler { d: params.d(), beta: params.beta(), cache: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Per-axis half jump counts for a loop of winding `j`.
    pub fn axis_counts<R: Rng + ?Sized>(&mut self, j: u64, rng: &mut R) -> Vec<u64> {
        let z = self.beta * j as f64 / self.d as f64;
        let d = self.d;
        if j <= CACHE_WINDINGS {
            let law = self.cache.entry(j).or_insert_with(|| BesselLaw::new(z));
            (0..d).map(|_| law.sample(rng)).collect()
        } else {
            let law = BesselLaw::new(z);
            (0..d).map(|_| law.sample(rng)).collect()
        }
    }

    /// A bridge loop of winding `j` based at `x`.
    pub fn sample_loop<R: Rng + ?Sized>(&mut self, x: &Site, j: u64, rng: &mut R) -> Loop {
        let steps = self.sample_steps(j, rng);
        self.attach_times(x, j, steps, rng)
    }

    /// The jump chain of a loop of winding `j`, without jump times. Together
    /// with [`BridgeSampler::attach_times`] this reproduces `sample_loop`
    /// draw for draw.
    pub fn sample_steps<R: Rng + ?Sized>(&mut self, j: u64, rng: &mut R) -> Vec<Step> {
        let counts = self.axis_counts(j, rng);
        shuffled_steps(&counts, rng)
    }

    pub fn attach_times<R: Rng + ?Sized>(&self, x: &Site, j: u64, steps: Vec<Step>, rng: &mut R) -> Loop {
        let t = self.beta * j as f64;
        let times = uniform_order_statistics(steps.len(), t, rng);
        Loop::from_parts_unchecked(PathSkeleton::from_parts_unchecked(x.clone(), times, steps, t), j, self.beta)
    }
}

/// Bridge of arbitrary duration `t` from `x` back to `x`.
pub fn sample_bridge<R: Rng + ?Sized>(params: &ModelParams, x: &Site, t: f64, rng: &mut R) -> Result<PathSkeleton> {
    x.check_dim(params.d())?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("bridge duration must be positive and finite, got {t}")));
    }
    let law = BesselLaw::new(t / params.d() as f64);
    let counts: Vec<u64> = (0..params.d()).map(|_| law.sample(rng)).collect();
    Ok(assemble(x.clone(), &counts, t, rng))
}

/// Shuffles `±e_i` with multiplicities `counts[i]` and lays the jumps on
/// uniform order statistics in `[0, t)`.
fn assemble<R: Rng + ?Sized>(x: Site, counts: &[u64], t: f64, rng: &mut R) -> PathSkeleton {
    let steps = shuffled_steps(counts, rng);
    let times = uniform_order_statistics(steps.len(), t, rng);
    PathSkeleton::from_parts_unchecked(x, times, steps, t)
}

fn shuffled_steps<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<Step> {
    let n: u64 = 2 * counts.iter().sum::<u64>();
    let mut steps = Vec::with_capacity(n as usize);
    for (axis, &m) in counts.iter().enumerate() {
        for _ in 0..m {
            steps.push(Step::new(axis, true));
            steps.push(Step::new(axis, false));
        }
    }
    steps.shuffle(rng);
    steps
}

/// Whether the closed jump chain from `x` visits `k`.
pub(crate) fn cycle_visits(x: &Site, steps: &[Step], k: &SiteSet) -> bool {
    let mut y = x.clone();
    if k.contains(y.coords()) {
        return true;
    }
    for &s in steps {
        y.apply(s);
        if k.contains(y.coords()) {
            return true;
        }
    }
    false
}

/// `n` sorted uniforms on `[0, t)` from normalised exponential spacings.
pub fn uniform_order_statistics<R: Rng + ?Sized>(n: usize, t: f64, rng: &mut R) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let mut acc = 0.0;
    let mut times: Vec<f64> = (0..n)
        .map(|_| {
            acc += rng.sample::<f64, _>(Exp1);
            acc
        })
        .collect();
    let total = acc + rng.sample::<f64, _>(Exp1);
    let top = t * (1.0 - f64::EPSILON);
    for s in times.iter_mut() {
        *s = (*s / total * t).min(top);
    }
    times
}
