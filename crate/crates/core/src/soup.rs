//! Poisson loop soups on a box.
//!
//! The soup on `Λ` is a Poisson point process with intensity
//! `Σ_{x∈Λ} Σ_j e^{βμj} j^{-1} P^{βj}_{x,x}`. Since the winding weight does
//! not depend on the base point, loops of winding `j` form a Poisson number
//! with mean `|Λ| w_j`, `w_j = e^{βμj} p_{βj}(0)/j`, with independent uniform
//! base points. Short windings get their own Poisson counts; longer ones are
//! drawn as one Poisson batch and assigned windings by inverse CDF.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::harness::stats::{self, Estimate};
use crate::kernels::ModelParams;
use crate::lattice::{Boundary, LatticeBox, Site};
use crate::paths::{BridgeSampler, Loop};
use crate::thermo;

/// Windings with individual Poisson counts.
const SHORT: u64 = 64;
/// Windings beyond `SHORT` kept in an explicit CDF table.
const TABLE: u64 = 4096;

/// Draw from `Poisson(mean)`, accepting a zero mean.
pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
    }
}

/// Per-site winding weights `w_j` on `n0 < j ≤ j_max`.
#[derive(Clone, Debug)]
pub struct WindingLaw {
    params: ModelParams,
    a: f64,
    lower: u64,
    upper: Option<u64>,
    short: Vec<f64>,
    table_cdf: Vec<f64>,
    table_mass: f64,
    far_mass: f64,
}

impl WindingLaw {
    /// Weights restricted to `lower < j ≤ upper` (`upper = None`: no cutoff).
    pub fn new(params: &ModelParams, lower: u64, upper: Option<u64>) -> Result<Self> {
        let a = -params.beta() * params.mu();
        if a == 0.0 && upper.is_none() {
            params.require_transient("an untruncated critical soup")?;
        }
        if let Some(u) = upper {
            if u <= lower {
                return Err(Error::InvalidParameter(format!("winding range ({lower}, {u}] is empty")));
            }
        }
        let cap = upper.unwrap_or(u64::MAX);
        let weight = |j: u64| {
            let jf = j as f64;
            (-a * jf).exp() * thermo::return_probability(params, params.beta() * jf) / jf
        };
        let short_end = (lower + SHORT).min(cap);
        let short: Vec<f64> = (lower + 1..=short_end).map(weight).collect();
        let table_end = (short_end + TABLE).min(cap);
        let mut acc = 0.0;
        let table_cdf: Vec<f64> = (short_end + 1..=table_end)
            .map(|j| {
                acc += weight(j);
                acc
            })
            .collect();
        let far_mass = if table_end < cap {
            let upper_tail = upper.map_or(0.0, |u| tail(params, a, u));
            (tail(params, a, table_end) - upper_tail).max(0.0)
        } else {
            0.0
        };
        Ok(WindingLaw { params: *params, a, lower, upper, short, table_cdf, table_mass: acc, far_mass })
    }

    /// All windings up to `j_max` (or unbounded).
    pub fn full(params: &ModelParams, j_max: Option<u64>) -> Result<Self> {
        Self::new(params, 0, j_max)
    }

    pub fn lower(&self) -> u64 {
        self.lower
    }

    pub fn upper(&self) -> Option<u64> {
        self.upper
    }

    /// `Σ_j w_j` over the range: expected number of loops per site.
    pub fn total_mass(&self) -> f64 {
        self.short.iter().sum::<f64>() + self.table_mass + self.far_mass
    }

    /// Expected `Σ βj` per site over the range.
    pub fn density(&self) -> f64 {
        let beta = self.params.beta();
        let short: f64 = self.short.iter().enumerate().map(|(i, w)| w * (self.lower + 1 + i as u64) as f64).sum();
        let table_start = self.lower + self.short.len() as u64 + 1;
        let mut prev = 0.0;
        let mut table = 0.0;
        for (i, c) in self.table_cdf.iter().enumerate() {
            table += (c - prev) * (table_start + i as u64) as f64;
            prev = *c;
        }
        let far_start = table_start + self.table_cdf.len() as u64 - 1;
        let far = if self.far_mass > 0.0 {
            let upper = self.upper.map_or(0.0, |u| thermo::series_from(&self.params, self.a, 0.0, u).value);
            thermo::series_from(&self.params, self.a, 0.0, far_start).value - upper
        } else {
            0.0
        };
        beta * (short + table + far)
    }

    /// Windings of all loops based in a region of `volume` sites.
    pub fn sample_windings<R: Rng + ?Sized>(&self, volume: f64, rng: &mut R) -> Vec<u64> {
        let mut out = Vec::new();
        for (i, w) in self.short.iter().enumerate() {
            let j = self.lower + 1 + i as u64;
            for _ in 0..poisson(volume * w, rng) {
                out.push(j);
            }
        }
        let rest = self.table_mass + self.far_mass;
        for _ in 0..poisson(volume * rest, rng) {
            let u = rng.random::<f64>() * rest;
            out.push(self.invert_beyond_short(u));
        }
        out
    }

    /// One winding from the normalised law on the range.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let short_mass: f64 = self.short.iter().sum();
        let mut u = rng.random::<f64>() * self.total_mass();
        if u < short_mass {
            for (i, w) in self.short.iter().enumerate() {
                if u < *w {
                    return self.lower + 1 + i as u64;
                }
                u -= w;
            }
            return self.lower + self.short.len() as u64;
        }
        self.invert_beyond_short((u - short_mass).min(self.table_mass + self.far_mass))
    }

    /// Smallest `j` beyond the short range whose cumulative weight reaches `u`.
    fn invert_beyond_short(&self, u: f64) -> u64 {
        let table_start = self.lower + self.short.len() as u64 + 1;
        if u < self.table_mass || self.far_mass == 0.0 {
            let i = self.table_cdf.partition_point(|&c| c < u).min(self.table_cdf.len().saturating_sub(1));
            return table_start + i as u64;
        }
        // Far range: find j with T(L) − T(j) ≥ r, T the tail sum beyond j.
        let r = u - self.table_mass;
        let l = table_start + self.table_cdf.len() as u64 - 1;
        let t_l = tail(&self.params, self.a, l);
        let upper_tail = self.upper.map_or(0.0, |m| tail(&self.params, self.a, m));
        let target = t_l - r;
        if target <= upper_tail {
            return self.upper.unwrap_or(u64::MAX);
        }
        let mut lo = l; // T(lo) > target
        let mut hi = l.saturating_mul(2).max(l + 1);
        while tail(&self.params, self.a, hi) > target {
            lo = hi;
            hi = hi.saturating_mul(2);
            if let Some(m) = self.upper {
                if hi >= m {
                    hi = m;
                    break;
                }
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if tail(&self.params, self.a, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `Σ_{j>n} e^{-aj} p_{βj}(0)/j`.
fn tail(params: &ModelParams, a: f64, n: u64) -> f64 {
    thermo::series_from(params, a, 1.0, n).value
}

/// Density mass `β Σ_{j>j_max} e^{βμj} p_{βj}(0)` missing from a truncated
/// soup.
pub fn truncated_density(params: &ModelParams, j_max: u64) -> f64 {
    let a = -params.beta() * params.mu();
    params.beta() * thermo::series_from(params, a, 0.0, j_max).value
}

/// A draw of the loop soup on a box.
#[derive(Clone, Debug)]
pub struct SoupSample {
    pub loops: Vec<Loop>,
    pub lattice_box: LatticeBox,
    pub params: ModelParams,
    pub j_max: Option<u64>,
    /// Expected density carried by windings above `j_max`.
    pub truncated_density: f64,
}

impl SoupSample {
    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }

    /// `Σ_{loops} βj`.
    pub fn total_duration(&self) -> f64 {
        self.loops.iter().map(|l| l.duration()).sum()
    }
}

/// Samples the soup on `lattice_box`. At `μ = 0` a finite `j_max` is
/// required; the density carried by longer loops is reported.
///
/// Under the Dirichlet boundary, loops leaving the box are discarded, which
/// thins the free soup to the killed loop measure.
pub fn sample_soup<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    j_max: Option<u64>,
    rng: &mut R,
) -> Result<SoupSample> {
    if lattice_box.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: lattice_box.dim() });
    }
    if params.mu() == 0.0 && j_max.is_none() {
        return Err(Error::InvalidParameter("a critical soup needs a finite winding cutoff".into()));
    }
    let law = WindingLaw::full(params, j_max)?;
    let mut sampler = BridgeSampler::new(params);
    let loops = sample_loops(&law, &mut sampler, lattice_box, rng);
    Ok(SoupSample {
        loops,
        lattice_box: lattice_box.clone(),
        params: *params,
        j_max,
        truncated_density: j_max.map_or(0.0, |m| truncated_density(params, m)),
    })
}

/// Loops of a soup on `lattice_box` drawn from `law`, reusing a bridge sampler.
pub fn sample_loops<R: Rng + ?Sized>(
    law: &WindingLaw,
    sampler: &mut BridgeSampler,
    lattice_box: &LatticeBox,
    rng: &mut R,
) -> Vec<Loop> {
    let windings = law.sample_windings(lattice_box.volume() as f64, rng);
    loops_from_windings(&windings, sampler, lattice_box, rng)
}

/// Loops with the given windings and independent uniform base points in
/// `lattice_box` (thinned under the Dirichlet boundary).
pub fn loops_from_windings<R: Rng + ?Sized>(
    windings: &[u64],
    sampler: &mut BridgeSampler,
    lattice_box: &LatticeBox,
    rng: &mut R,
) -> Vec<Loop> {
    let mut loops = Vec::with_capacity(windings.len());
    for &j in windings {
        let x = lattice_box.random_site(rng);
        let l = sampler.sample_loop(&x, j, rng);
        if lattice_box.boundary() == Boundary::Dirichlet && !stays_inside(&l, lattice_box) {
            continue;
        }
        loops.push(l);
    }
    loops
}

fn stays_inside(l: &Loop, b: &LatticeBox) -> bool {
    let mut x = l.skeleton().start().clone();
    if !b.contains(x.coords()) {
        return false;
    }
    for &s in l.skeleton().steps() {
        x.apply(s);
        if !b.contains(x.coords()) {
            return false;
        }
    }
    true
}

/// Occupation field `𝓛_x = Σ_{ω∈η} L_x(ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupationField {
    pub values: HashMap<Site, f64>,
    pub normalizer: f64,
}

impl OccupationField {
    pub fn at(&self, x: &Site) -> f64 {
        self.values.get(x).copied().unwrap_or(0.0)
    }

    /// `Σ_x 𝓛_x / |Λ|`.
    pub fn mean_density(&self) -> f64 {
        self.values.values().sum::<f64>() / self.normalizer
    }
}

pub fn occupation_field(sample: &SoupSample) -> OccupationField {
    let mut values: HashMap<Site, f64> = HashMap::new();
    for l in &sample.loops {
        for seg in l.skeleton().segments() {
            *values.entry(seg.site).or_insert(0.0) += seg.to - seg.from;
        }
    }
    OccupationField { values, normalizer: sample.lattice_box.volume() as f64 }
}

/// `𝓛̄ = Σ_x 𝓛_x / |Λ|`, summing over all of `Z^d`.
pub fn mean_density(sample: &SoupSample) -> f64 {
    sample.total_duration() / sample.lattice_box.volume() as f64
}

/// `𝓛̄` of a fresh free-boundary soup from its windings alone.
pub fn sample_mean_density<R: Rng + ?Sized>(law: &WindingLaw, volume: f64, beta: f64, rng: &mut R) -> f64 {
    let total: u64 = law.sample_windings(volume, rng).iter().sum();
    beta * total as f64 / volume
}

/// Monte Carlo estimate of `P(𝓛̄_Λ > ρ)` under the free boundary, with its
/// binomial standard error. `j_max = None` samples the untruncated law
/// (`d ≥ 3` at `μ = 0`).
pub fn exceedance_probability<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    rho_target: f64,
    n_reps: u64,
    j_max: Option<u64>,
    rng: &mut R,
) -> Result<Estimate> {
    if !(rho_target >= 0.0) {
        return Err(Error::InvalidParameter(format!("target density must be >= 0, got {rho_target}")));
    }
    let law = WindingLaw::full(params, j_max)?;
    let volume = lattice_box.volume() as f64;
    let mut hits = 0;
    for _ in 0..n_reps {
        if sample_mean_density(&law, volume, params.beta(), rng) > rho_target {
            hits += 1;
        }
    }
    stats::proportion(hits, n_reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, ModuleTag};

    fn crit() -> ModelParams {
        ModelParams::critical(3, 1.0).unwrap()
    }

    #[test]
    fn winding_law_masses() {
        let p = crit();
        let law = WindingLaw::full(&p, None).unwrap();
        assert!((law.total_mass() / thermo::loop_mass(&p).unwrap() - 1.0).abs() < 1e-10);
        assert!((law.density() / thermo::critical_density(&p, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let tail = WindingLaw::new(&p, 10_000, None).unwrap();
        assert!((tail.total_mass() / thermo::tail_mass(&p, 10_000).unwrap() - 1.0).abs() < 1e-10);
        let q = ModelParams::new(3, 1.0, -0.2).unwrap();
        let law = WindingLaw::full(&q, None).unwrap();
        assert!((law.density() / thermo::rho(&q, -0.2, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let cut = WindingLaw::full(&p, Some(100)).unwrap();
        let missing = truncated_density(&p, 100);
        assert!((cut.density() + missing - law_density(&p)).abs() < 1e-10);
        assert!(WindingLaw::full(&ModelParams::critical(2, 1.0).unwrap(), None).is_err());
        assert!(WindingLaw::full(&ModelParams::critical(2, 1.0).unwrap(), Some(50)).is_ok());
    }

    fn law_density(p: &ModelParams) -> f64 {
        thermo::critical_density(p, 1e-12).unwrap()
    }

    #[test]
    fn tail_windings_follow_the_tail_law() {
        // Median of the law conditioned on j > n versus the series.
        let p = crit();
        let n = 1000;
        let law = WindingLaw::new(&p, n, None).unwrap();
        let mut rng = stream(1, ModuleTag::Soup, 0, 0);
        let draws = 20_000;
        let mut js: Vec<u64> = (0..draws).map(|_| law.sample_one(&mut rng)).collect();
        js.sort();
        assert!(js[0] > n);
        let total = thermo::tail_mass(&p, n).unwrap();
        // The median m solves tail(m) = total / 2.
        let mut m = n;
        while thermo::tail_mass(&p, m).unwrap() > 0.5 * total {
            m += 1;
        }
        let below = js.iter().filter(|&&j| j < m).count() as f64 / draws as f64;
        let se = (0.25 / draws as f64).sqrt();
        assert!((below - 0.5).abs() < 4.0 * se, "{below} (median {m})");
    }

    #[test]
    fn expected_loop_count_per_site() {
        let p = crit();
        let law = WindingLaw::full(&p, Some(50)).unwrap();
        let mut rng = stream(2, ModuleTag::Soup, 0, 0);
        let reps = 4000;
        let counts: Vec<f64> = (0..reps).map(|_| law.sample_windings(64.0, &mut rng).len() as f64).collect();
        let e = stats::mean_and_se(&counts).unwrap();
        assert!(e.z_score(64.0 * law.total_mass()) < 3.0, "{e:?}");
    }

    #[test]
    fn occupation_identities() {
        let p = ModelParams::new(3, 1.0, -0.2).unwrap();
        let b = LatticeBox::new(3, 6, Boundary::Free).unwrap();
        let mut rng = stream(3, ModuleTag::Soup, 0, 0);
        let s = sample_soup(&b, &p, None, &mut rng).unwrap();
        let f = occupation_field(&s);
        assert!((f.mean_density() - mean_density(&s)).abs() < 1e-9);
        let empty = SoupSample { loops: vec![], ..s.clone() };
        assert_eq!(mean_density(&empty), 0.0);
        assert!(occupation_field(&empty).values.is_empty());
        let single = SoupSample { loops: vec![Loop::constant(Site::origin(3), 3, 1.0).unwrap()], ..s };
        let f = occupation_field(&single);
        assert_eq!(f.at(&Site::origin(3)), 3.0);
        assert!((mean_density(&single) - 3.0 / 216.0).abs() < 1e-15);
    }

    #[test]
    fn critical_soup_needs_cutoff() {
        let b = LatticeBox::new(3, 4, Boundary::Free).unwrap();
        let mut rng = stream(4, ModuleTag::Soup, 0, 0);
        assert!(sample_soup(&b, &crit(), None, &mut rng).is_err());
        let s = sample_soup(&b, &crit(), Some(200), &mut rng).unwrap();
        assert!(s.truncated_density > 0.0);
        assert!(s.loops.iter().all(|l| l.winding() <= 200 && b.contains(l.base().coords())));
    }

    #[test]
    fn dirichlet_loops_are_confined() {
        let p = ModelParams::new(3, 1.0, -0.1).unwrap();
        let b = LatticeBox::new(3, 6, Boundary::Dirichlet).unwrap();
        let mut rng = stream(5, ModuleTag::Soup, 0, 0);
        for _ in 0..200 {
            let s = sample_soup(&b, &p, None, &mut rng).unwrap();
            for l in &s.loops {
                assert!(stays_inside(l, &b));
            }
        }
    }

    #[test]
    fn density_identity_small() {
        let p = ModelParams::new(3, 1.0, -0.2).unwrap();
        let b = LatticeBox::new(3, 6, Boundary::Free).unwrap();
        let mut rng = stream(6, ModuleTag::Soup, 0, 0);
        let xs: Vec<f64> = (0..2000).map(|_| mean_density(&sample_soup(&b, &p, None, &mut rng).unwrap())).collect();
        let e = stats::mean_and_se(&xs).unwrap();
        assert!(e.z_score(thermo::rho(&p, -0.2, 1e-10).unwrap()) < 3.0, "{e:?}");
    }

    #[test]
    fn sub_box_counts_are_poisson() {
        // Loops based in the two halves of the box: Poisson and independent.
        let p = ModelParams::new(3, 1.0, -0.2).unwrap();
        let b = LatticeBox::new(3, 4, Boundary::Free).unwrap();
        let mut rng = stream(7, ModuleTag::Soup, 0, 0);
        let law = WindingLaw::full(&p, None).unwrap();
        let mut sampler = BridgeSampler::new(&p);
        let reps = 10_000;
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for _ in 0..reps {
            let loops = sample_loops(&law, &mut sampler, &b, &mut rng);
            let l = loops.iter().filter(|l| l.skeleton().start().coords()[0] < 0).count() as f64;
            left.push(l);
            right.push(loops.len() as f64 - l);
        }
        for c in [&left, &right] {
            let disp = stats::poisson_dispersion(c).unwrap();
            assert!((0.9..=1.1).contains(&disp), "{disp}");
        }
        let ml = left.iter().sum::<f64>() / reps as f64;
        let mr = right.iter().sum::<f64>() / reps as f64;
        let cov = left.iter().zip(&right).map(|(a, b)| (a - ml) * (b - mr)).sum::<f64>() / reps as f64;
        let corr = cov / (ml * mr).sqrt();
        assert!(corr.abs() < 4.0 / (reps as f64).sqrt(), "{corr}");
    }

    #[test]
    fn translated_boxes_have_the_same_density_law() {
        let p = ModelParams::new(3, 1.0, -0.3).unwrap();
        let b = LatticeBox::new(3, 4, Boundary::Free).unwrap();
        let shifted = b.translate_by_cells(&Site::new(&[2, -1, 5])).unwrap();
        let mut rng = stream(8, ModuleTag::Soup, 0, 0);
        let a: Vec<f64> = (0..3000).map(|_| mean_density(&sample_soup(&b, &p, None, &mut rng).unwrap())).collect();
        let c: Vec<f64> = (0..3000).map(|_| mean_density(&sample_soup(&shifted, &p, None, &mut rng).unwrap())).collect();
        assert!(stats::ks_two_sample(&a, &c).unwrap().p_value > 0.01);
    }

    #[test]
    fn exceedance_edge_cases() {
        let b = LatticeBox::new(3, 8, Boundary::Free).unwrap();
        let mut rng = stream(9, ModuleTag::Soup, 0, 0);
        let p = crit();
        let rho_c = thermo::critical_density(&p, 1e-10).unwrap();
        assert_eq!(exceedance_probability(&b, &p, 0.0, 500, None, &mut rng).unwrap().mean, 1.0);
        assert_eq!(exceedance_probability(&b, &p, 1e3 * rho_c, 500, None, &mut rng).unwrap().mean, 0.0);
    }
}
