//! The loop soup conditioned on a supercritical density.
//!
//! Two samplers are provided. The rejection oracle draws from
//! `P_Λ(· | 𝓛̄_Λ > ρ)` exactly by repeating unconditioned draws, which is only
//! feasible on small boxes. The decomposed sampler replaces the conditioning
//! by the event `A_Λ` that some loop based in `Λ` is longer than `ρ_ε|Λ|`:
//! every box of a grid carries an independent soup of the shorter loops plus
//! a layer of long loops drawn from the normalised tail `M̄_Λ` of the loop
//! measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::stats::{self, Estimate, TestResult};
use crate::kernels::ModelParams;
use crate::lattice::{Boundary, LatticeBox, Site, SiteSet};
use crate::paths::cycle_visits;
use crate::paths::{BridgeSampler, Loop};
use crate::soup::{self, SoupSample, WindingLaw};
use crate::thermo;

/// How many long loops each box carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LongLoopMode {
    /// Exactly one loop from `M̄_Λ` per box.
    OnePerBox,
    /// A zero-truncated `Poisson(Z_Λ)` number of loops per box, which is the
    /// exact law of the long loops under `P_Λ(· | A_Λ)`.
    Poissonized,
}

/// Geometry of the conditioned ensemble: the box `Λ`, the excess density
/// `ρ_ε` and the grid `Λ_N = ∪_{x∈C_N} (xN + Λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedConfig {
    rho_eps: f64,
    central: LatticeBox,
    grid_side: u32,
    boxes: Vec<LatticeBox>,
    mode: LongLoopMode,
}

impl ConditionedConfig {
    /// `grid_side` is the (odd) number of boxes per axis in `C_N`.
    pub fn new(central: LatticeBox, rho_eps: f64, grid_side: u32, mode: LongLoopMode) -> Result<Self> {
        if !(rho_eps > 0.0) || !rho_eps.is_finite() {
            return Err(Error::InvalidParameter(format!("excess density must be positive, got {rho_eps}")));
        }
        if grid_side == 0 || grid_side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("grid side must be a positive odd integer, got {grid_side}")));
        }
        if central.boundary() != Boundary::Free {
            return Err(Error::InvalidParameter("the conditioned ensemble is implemented for the free boundary".into()));
        }
        let d = central.dim();
        let r = (grid_side / 2) as i32;
        let cells = SiteSet::cube(d, r);
        let boxes = cells.sites().iter().map(|c| central.translate_by_cells(c)).collect::<Result<Vec<_>>>()?;
        Ok(ConditionedConfig { rho_eps, central, grid_side, boxes, mode })
    }

    /// Uses the grid side `ρ_N N^{d/2−1}` with `ρ_N = log N`.
    pub fn with_default_grid(central: LatticeBox, rho_eps: f64, mode: LongLoopMode) -> Result<Self> {
        let side = default_grid_side(central.dim(), central.side());
        Self::new(central, rho_eps, side, mode)
    }

    pub fn rho_eps(&self) -> f64 {
        self.rho_eps
    }

    pub fn central(&self) -> &LatticeBox {
        &self.central
    }

    pub fn grid_side(&self) -> u32 {
        self.grid_side
    }

    pub fn boxes(&self) -> &[LatticeBox] {
        &self.boxes
    }

    pub fn mode(&self) -> LongLoopMode {
        self.mode
    }

    pub fn with_mode(mut self, mode: LongLoopMode) -> Self {
        self.mode = mode;
        self
    }

    /// `ρ_ε |Λ|`, in units of time.
    pub fn threshold(&self) -> f64 {
        self.rho_eps * self.central.volume() as f64
    }
}

/// Odd integer nearest to `log N · N^{d/2−1}` (at least 1).
pub fn default_grid_side(d: usize, n: u32) -> u32 {
    let nf = n as f64;
    let raw = nf.ln() * nf.powf(d as f64 / 2.0 - 1.0);
    let k = ((raw - 1.0) / 2.0).round().max(0.0) as u32;
    2 * k + 1
}

/// Largest winding that is not long: loops with `j > n0` satisfy
/// `βj > ρ_ε|Λ|`.
pub fn winding_threshold(params: &ModelParams, volume: u64, rho_eps: f64) -> u64 {
    (rho_eps * volume as f64 / params.beta()).floor() as u64
}

/// `Z_Λ = M_Λ[A_Λ] = |Λ| Σ_{j>n0} e^{βμj} p_{βj}(0)/j`.
pub fn z_lambda(params: &ModelParams, lattice_box: &LatticeBox, rho_eps: f64) -> Result<f64> {
    let n0 = winding_threshold(params, lattice_box.volume(), rho_eps);
    Ok(lattice_box.volume() as f64 * WindingLaw::new(params, n0, None)?.total_mass())
}

/// An accepted draw of the rejection oracle.
#[derive(Debug, Clone)]
pub struct RejectionDraw {
    pub sample: SoupSample,
    pub attempts: u64,
}

/// Exact draw from `P_Λ(· | 𝓛̄_Λ > ρ)` on a free-boundary box by rejection.
///
/// Attempts only sample windings; the loops of the accepted attempt are then
/// materialised. `j_max = None` uses the untruncated winding law.
pub fn rejection_conditioned_sample<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    rho: f64,
    j_max: Option<u64>,
    rng: &mut R,
    max_attempts: u64,
) -> Result<RejectionDraw> {
    let law = WindingLaw::full(params, j_max)?;
    let mut sampler = BridgeSampler::new(params);
    RejectionOracle { lattice_box, params, law: &law, rho }.draw(&mut sampler, rng, max_attempts)
}

struct RejectionOracle<'a> {
    lattice_box: &'a LatticeBox,
    params: &'a ModelParams,
    law: &'a WindingLaw,
    rho: f64,
}

impl RejectionOracle<'_> {
    fn draw<R: Rng + ?Sized>(&self, sampler: &mut BridgeSampler, rng: &mut R, max_attempts: u64) -> Result<RejectionDraw> {
        if self.lattice_box.dim() != self.params.d() {
            return Err(Error::DimensionMismatch { expected: self.params.d(), got: self.lattice_box.dim() });
        }
        if self.lattice_box.boundary() != Boundary::Free {
            return Err(Error::InvalidParameter("the rejection oracle is implemented for the free boundary".into()));
        }
        if !(self.rho >= 0.0) {
            return Err(Error::InvalidParameter(format!("target density must be >= 0, got {}", self.rho)));
        }
        let volume = self.lattice_box.volume() as f64;
        let beta = self.params.beta();
        for attempt in 1..=max_attempts {
            let windings = self.law.sample_windings(volume, rng);
            let total: u64 = windings.iter().sum();
            if beta * total as f64 / volume > self.rho {
                let loops = soup::loops_from_windings(&windings, sampler, self.lattice_box, rng);
                let j_max = self.law.upper();
                let sample = SoupSample {
                    loops,
                    lattice_box: self.lattice_box.clone(),
                    params: *self.params,
                    j_max,
                    truncated_density: j_max.map_or(0.0, |m| soup::truncated_density(self.params, m)),
                };
                return Ok(RejectionDraw { sample, attempts: attempt });
            }
        }
        Err(Error::Infeasible { attempts: max_attempts, rate: 0.0 })
    }
}

/// Sampler for `M̄_Λ`, the loop measure restricted to loops based in a box of
/// volume `|Λ|` with `ℓ > ρ_ε|Λ|`, normalised.
#[derive(Debug, Clone)]
pub struct BigLoopSampler {
    law: WindingLaw,
    bridge: BridgeSampler,
    volume: u64,
}

impl BigLoopSampler {
    pub fn new(params: &ModelParams, volume: u64, rho_eps: f64) -> Result<Self> {
        params.require_transient("the long-loop layer")?;
        if !(rho_eps > 0.0) {
            return Err(Error::InvalidParameter(format!("excess density must be positive, got {rho_eps}")));
        }
        let n0 = winding_threshold(params, volume, rho_eps);
        Ok(BigLoopSampler { law: WindingLaw::new(params, n0, None)?, bridge: BridgeSampler::new(params), volume })
    }

    pub fn law(&self) -> &WindingLaw {
        &self.law
    }

    /// `Z_Λ`.
    pub fn z_lambda(&self) -> f64 {
        self.volume as f64 * self.law.total_mass()
    }

    /// A long loop based uniformly in `lattice_box`.
    pub fn sample_in<R: Rng + ?Sized>(&mut self, lattice_box: &LatticeBox, rng: &mut R) -> Loop {
        let j = self.law.sample_one(rng);
        let x = lattice_box.random_site(rng);
        self.bridge.sample_loop(&x, j, rng)
    }

    /// As [`BigLoopSampler::sample_in`], but jump times are only drawn when
    /// the loop visits `k`; otherwise `None`.
    pub fn sample_in_if_hits<R: Rng + ?Sized>(
        &mut self,
        lattice_box: &LatticeBox,
        k: &SiteSet,
        rng: &mut R,
    ) -> Option<Loop> {
        let j = self.law.sample_one(rng);
        let x = lattice_box.random_site(rng);
        let steps = self.bridge.sample_steps(j, rng);
        if cycle_visits(&x, &steps, k) {
            Some(self.bridge.attach_times(&x, j, steps, rng))
        } else {
            None
        }
    }
}

/// One loop from `M̄_Λ`: base uniform over `Λ`, winding from the normalised
/// tail `j > ρ_ε|Λ|/β`, and a bridge of duration `βj`.
pub fn big_loop_sample<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    rho_eps: f64,
    rng: &mut R,
) -> Result<Loop> {
    if lattice_box.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: lattice_box.dim() });
    }
    Ok(BigLoopSampler::new(params, lattice_box.volume(), rho_eps)?.sample_in(lattice_box, rng))
}

/// Draw from a zero-truncated `Poisson(z)`.
fn zero_truncated_poisson<R: Rng + ?Sized>(z: f64, rng: &mut R) -> u64 {
    let norm = z.exp_m1();
    let mut u = rng.random::<f64>() * norm;
    let mut term = z;
    let mut k = 1;
    while u > term && k < 10_000 {
        u -= term;
        k += 1;
        term *= z / k as f64;
    }
    k
}

/// Contents of one box of the grid.
#[derive(Debug, Clone)]
pub struct BoxDraw {
    pub soup: SoupSample,
    pub long_loops: Vec<Loop>,
}

/// A draw of the decomposed conditioned ensemble on the whole grid.
#[derive(Debug, Clone)]
pub struct DecomposedSample {
    pub boxes: Vec<BoxDraw>,
}

impl DecomposedSample {
    pub fn long_loops(&self) -> impl Iterator<Item = &Loop> {
        self.boxes.iter().flat_map(|b| b.long_loops.iter())
    }

    pub fn long_loop_count(&self) -> usize {
        self.boxes.iter().map(|b| b.long_loops.len()).sum()
    }

    /// `𝓛_x` summed over the soups and long loops of all boxes.
    pub fn local_time(&self, x: &Site) -> f64 {
        self.boxes
            .iter()
            .flat_map(|b| b.soup.loops.iter().chain(b.long_loops.iter()))
            .map(|l| l.local_time(x))
            .sum()
    }
}

/// Reusable sampler for [`DecomposedSample`]s.
///
/// The per-box soup consists of the loops with `j ≤ ρ_ε|Λ|/β`, the part of
/// the soup independent of `A_Λ`; the long loops come from `M̄_Λ`.
#[derive(Debug, Clone)]
pub struct DecomposedSampler {
    config: ConditionedConfig,
    params: ModelParams,
    short: WindingLaw,
    short_cutoff: u64,
    big: BigLoopSampler,
    bridge: BridgeSampler,
}

impl DecomposedSampler {
    pub fn new(config: &ConditionedConfig, params: &ModelParams) -> Result<Self> {
        if config.central.dim() != params.d() {
            return Err(Error::DimensionMismatch { expected: params.d(), got: config.central.dim() });
        }
        let volume = config.central.volume();
        let big = BigLoopSampler::new(params, volume, config.rho_eps)?;
        let short_cutoff = big.law.lower();
        let short = if short_cutoff == 0 {
            None
        } else {
            Some(WindingLaw::full(params, Some(short_cutoff))?)
        };
        let short = match short {
            Some(l) => l,
            None => return Err(Error::InvalidParameter("ρ_ε|Λ| is below one winding; every loop would be long".into())),
        };
        Ok(DecomposedSampler {
            config: config.clone(),
            params: *params,
            short,
            short_cutoff,
            big,
            bridge: BridgeSampler::new(params),
        })
    }

    pub fn config(&self) -> &ConditionedConfig {
        &self.config
    }

    pub fn z_lambda(&self) -> f64 {
        self.big.z_lambda()
    }

    fn long_count<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self.config.mode {
            LongLoopMode::OnePerBox => 1,
            LongLoopMode::Poissonized => zero_truncated_poisson(self.z_lambda(), rng),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> DecomposedSample {
        let truncated_density = soup::truncated_density(&self.params, self.short_cutoff);
        let mut boxes = Vec::with_capacity(self.config.boxes.len());
        for b in &self.config.boxes {
            let loops = soup::sample_loops(&self.short, &mut self.bridge, b, rng);
            let soup = SoupSample {
                loops,
                lattice_box: b.clone(),
                params: self.params,
                j_max: Some(self.short_cutoff),
                truncated_density,
            };
            let k = self.long_count(rng);
            let long_loops = (0..k).map(|_| self.big.sample_in(b, rng)).collect();
            boxes.push(BoxDraw { soup, long_loops });
        }
        DecomposedSample { boxes }
    }

    /// The long-loop layer only, keeping the loops that visit `k`.
    pub fn long_loops_hitting<R: Rng + ?Sized>(&mut self, k: &SiteSet, rng: &mut R) -> Vec<Loop> {
        let mut out = Vec::new();
        for b in &self.config.boxes {
            let count = self.long_count(rng);
            for _ in 0..count {
                if let Some(l) = self.big.sample_in_if_hits(b, k, rng) {
                    out.push(l);
                }
            }
        }
        out
    }
}

/// One draw of the decomposed ensemble `P_N ⊗ P̄_N` on the grid of `config`.
pub fn decomposed_conditioned_sample<R: Rng + ?Sized>(
    config: &ConditionedConfig,
    params: &ModelParams,
    rng: &mut R,
) -> Result<DecomposedSample> {
    Ok(DecomposedSampler::new(config, params)?.sample(rng))
}

/// Per-sample counts with their moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub counts: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    /// Variance over mean; `NaN` when every count is zero.
    pub dispersion: f64,
}

impl CountStats {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyInput("counts"));
        }
        let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let e = stats::mean_and_se(&xs)?;
        let variance = e.std_err * e.std_err * e.n as f64;
        let dispersion = if e.mean > 0.0 { variance / e.mean } else { f64::NAN };
        Ok(CountStats { counts, mean: e.mean, variance, dispersion })
    }
}

/// Number of long loops (across all boxes) that visit `k`, per sample.
pub fn long_loops_hitting<R: Rng + ?Sized>(
    config: &ConditionedConfig,
    params: &ModelParams,
    k: &SiteSet,
    samples: u64,
    rng: &mut R,
) -> Result<CountStats> {
    if samples == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    if k.sites().iter().any(|z| !config.central.contains(z.coords())) {
        return Err(Error::InvalidParameter("K must lie in the central box".into()));
    }
    let mut sampler = DecomposedSampler::new(config, params)?;
    let counts = (0..samples).map(|_| sampler.long_loops_hitting(k, rng).len() as u64).collect();
    CountStats::from_counts(counts)
}

/// Agreement of the events `A_ρ = {𝓛̄ > ρ_c + ρ_ε}` and
/// `A_Λ = {some loop has ℓ > ρ_ε|Λ|}` under the critical soup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub p_rho: Estimate,
    pub p_lambda: Estimate,
    pub p_symmetric_difference: Estimate,
    /// `P(A_ρ Δ A_Λ) / P(A_ρ)`.
    pub ratio: f64,
}

pub fn conditioning_overlap<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    rho_eps: f64,
    reps: u64,
    rng: &mut R,
) -> Result<OverlapReport> {
    let rho_c = thermo::critical_density(params, 1e-10)?;
    let law = WindingLaw::full(params, None)?;
    let volume = lattice_box.volume() as f64;
    let beta = params.beta();
    let (mut a_rho, mut a_lambda, mut diff) = (0, 0, 0);
    for _ in 0..reps {
        let w = law.sample_windings(volume, rng);
        let total: u64 = w.iter().sum();
        let longest = w.iter().copied().max().unwrap_or(0);
        let in_rho = beta * total as f64 / volume > rho_c + rho_eps;
        let in_lambda = beta * longest as f64 > rho_eps * volume;
        a_rho += in_rho as u64;
        a_lambda += in_lambda as u64;
        diff += (in_rho != in_lambda) as u64;
    }
    let p_rho = stats::proportion(a_rho, reps)?;
    Ok(OverlapReport {
        p_rho,
        p_lambda: stats::proportion(a_lambda, reps)?,
        p_symmetric_difference: stats::proportion(diff, reps)?,
        ratio: if a_rho > 0 { diff as f64 / a_rho as f64 } else { f64::NAN },
    })
}

/// Single-big-jump check on centred Pareto variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJumpReport {
    pub probability: Estimate,
    /// `n P(X_1 > bn)`.
    pub single_term: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

/// Estimates `P(S_n > bn)` for `S_n` a sum of `n` i.i.d. `X = P − E P` with
/// `P` Pareto (scale 1, index `alpha > 1`) by direct simulation and compares
/// with `n P(X_1 > bn)`.
pub fn pareto_big_jump<R: Rng + ?Sized>(alpha: f64, n: u64, b: f64, trials: u64, rng: &mut R) -> Result<BigJumpReport> {
    if !(alpha > 1.0) || n == 0 || !(b > 0.0) {
        return Err(Error::InvalidParameter(format!("need alpha > 1, n >= 1, b > 0 (got {alpha}, {n}, {b})")));
    }
    let mean = alpha / (alpha - 1.0);
    let inv = -1.0 / alpha;
    let level = b * n as f64 + mean * n as f64;
    let mut hits = 0;
    for _ in 0..trials {
        let mut s = 0.0;
        for _ in 0..n {
            let u: f64 = 1.0 - rng.random::<f64>();
            s += u.powf(inv);
        }
        hits += (s > level) as u64;
    }
    let probability = stats::proportion(hits, trials)?;
    let single_term = n as f64 * (b * n as f64 + mean).powf(-alpha);
    Ok(BigJumpReport {
        probability,
        single_term,
        ratio: probability.mean / single_term,
        ratio_se: probability.std_err / single_term,
    })
}

/// How the conditioned side of [`tilting_check`] is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TiltMethod {
    /// Repeated unconditioned draws at `μ` until `𝓛̄ > ρ(μ) + ρ_ε`.
    Rejection { max_attempts: u64 },
    /// Draws at the tilted potential `b`, reweighted to `μ` by the likelihood
    /// ratio `e^{(μ−b)|Λ|𝓛̄}` and restricted to `𝓛̄ > ρ(μ) + ρ_ε`.
    Importance,
}

/// Subcritical conditioning versus the shifted chemical potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltReport {
    pub mu: f64,
    pub mu_tilted: f64,
    /// `ρ(μ) + ρ_ε`.
    pub target_density: f64,
    /// `ρ(b(ρ(μ) + ρ_ε))` from the series.
    pub tilted_density_series: f64,
    pub conditioned_density: Estimate,
    pub tilted_density: Estimate,
    pub conditioned_origin_time: Estimate,
    pub tilted_origin_time: Estimate,
    /// KS test on the local time at the box centre.
    pub ks: TestResult,
    /// Acceptance rate of the rejection draws, or the fraction of proposals
    /// inside the event for importance sampling.
    pub acceptance_rate: f64,
    /// `|E[𝓛̄ | conditioning] − ρ(b)| / ρ(b)`.
    pub relative_gap: f64,
}

pub fn tilting_check<R: Rng + ?Sized>(
    lattice_box: &LatticeBox,
    params: &ModelParams,
    rho_eps: f64,
    samples: u64,
    method: TiltMethod,
    rng: &mut R,
) -> Result<TiltReport> {
    let mu = params.mu();
    if !(mu < 0.0) {
        return Err(Error::InvalidParameter(format!("tilting needs a subcritical potential mu < 0, got {mu}")));
    }
    if !(rho_eps >= 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("need rho_eps >= 0 and a positive sample count".into()));
    }
    if lattice_box.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: lattice_box.dim() });
    }
    let tol = 1e-12;
    let target = thermo::rho(params, mu, tol)? + rho_eps;
    if params.d() >= 3 {
        let critical = thermo::critical_density(params, tol)?;
        if target > critical {
            return Err(Error::Supercritical { target, critical });
        }
    }
    let b = thermo::invert_density(params, target, tol)?;
    let tilted = params.with_mu(b)?;
    let tilted_density_series = thermo::rho(&tilted, b, tol)?;
    let centre = lattice_box.offset().clone();
    let volume = lattice_box.volume() as f64;
    let mut sampler = BridgeSampler::new(params);

    let observe = |s: &SoupSample| (soup::mean_density(s), s.loops.iter().map(|l| l.local_time(&centre)).sum::<f64>());

    let tilted_law = WindingLaw::full(&tilted, None)?;
    let tilted_draw = |sampler: &mut BridgeSampler, rng: &mut R| {
        let loops = soup::sample_loops(&tilted_law, sampler, lattice_box, rng);
        SoupSample { loops, lattice_box: lattice_box.clone(), params: tilted, j_max: None, truncated_density: 0.0 }
    };

    let mut cond_density = Vec::new();
    let mut cond_time = Vec::new();
    let mut weights = Vec::new();
    let acceptance_rate;
    match method {
        TiltMethod::Rejection { max_attempts } => {
            let law = WindingLaw::full(params, None)?;
            let oracle = RejectionOracle { lattice_box, params, law: &law, rho: target };
            let mut attempts = 0;
            for _ in 0..samples {
                let draw = oracle.draw(&mut sampler, rng, max_attempts).map_err(|e| match e {
                    Error::Infeasible { attempts: a, .. } => {
                        Error::Infeasible { attempts: a, rate: cond_density.len() as f64 / (attempts + a) as f64 }
                    }
                    other => other,
                })?;
                attempts += draw.attempts;
                let (rho_bar, t0) = observe(&draw.sample);
                cond_density.push(rho_bar);
                cond_time.push(t0);
                weights.push(1.0);
            }
            acceptance_rate = samples as f64 / attempts as f64;
        }
        TiltMethod::Importance => {
            let mut log_w = Vec::new();
            for _ in 0..samples {
                let s = tilted_draw(&mut sampler, rng);
                let (rho_bar, t0) = observe(&s);
                if rho_bar > target {
                    cond_density.push(rho_bar);
                    cond_time.push(t0);
                    log_w.push((mu - b) * volume * rho_bar);
                }
            }
            if log_w.is_empty() {
                return Err(Error::Infeasible { attempts: samples, rate: 0.0 });
            }
            let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            weights = log_w.iter().map(|l| (l - top).exp()).collect();
            acceptance_rate = cond_density.len() as f64 / samples as f64;
        }
    }

    let mut free_density = Vec::with_capacity(samples as usize);
    let mut free_time = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let s = tilted_draw(&mut sampler, rng);
        let (rho_bar, t0) = observe(&s);
        free_density.push(rho_bar);
        free_time.push(t0);
    }

    let conditioned_density = stats::weighted_mean(&cond_density, &weights)?;
    Ok(TiltReport {
        mu,
        mu_tilted: b,
        target_density: target,
        tilted_density_series,
        conditioned_density,
        tilted_density: stats::mean_and_se(&free_density)?,
        conditioned_origin_time: stats::weighted_mean(&cond_time, &weights)?,
        tilted_origin_time: stats::mean_and_se(&free_time)?,
        ks: stats::ks_weighted(&cond_time, &weights, &free_time)?,
        acceptance_rate,
        relative_gap: (conditioned_density.mean - tilted_density_series).abs() / tilted_density_series,
    })
}
