//! Loop-measure masses and large-deviation functions of the free Bose gas.
//!
//! Everything here is a series `S(a, s) = Σ_{j≥1} e^{-aj} j^{-s} p_{βj}(0)`
//! with `a = -βμ`:
//! `ρ(μ) = β S(a, 0)`, `M(μ) = S(a, 1)` and `ρ_c = ρ(0)`.
//! The head `j ≤ J` is summed exactly; the remainder is either bounded
//! geometrically (when `a > 0` makes it negligible) or evaluated by
//! Euler–Maclaurin applied to the large-time expansion of `p_t(0)`.

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::kernels::{ive, large_time_coefficients, ModelParams};
use crate::quad;
use std::f64::consts::PI;

/// Hankel terms kept in the large-time expansion of `p_t(0)`.
const EXPANSION_ORDER: usize = 8;

/// Default tolerance for series whose callers do not pass one.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A series value with its certified truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub error_bound: f64,
}

impl SeriesValue {
    fn within(self, tol: f64) -> Result<f64> {
        if self.error_bound <= tol {
            Ok(self.value)
        } else {
            Err(Error::ToleranceUnreachable { requested: tol, achieved: self.error_bound })
        }
    }
}

/// `p_{βj}(0)` on the lattice of the given dimension.
pub(crate) fn return_probability(params: &ModelParams, t: f64) -> f64 {
    ive(0, t / params.d() as f64).powi(params.d() as i32)
}

/// Coefficients `A_k` with `p_t(0) ≈ Σ_k A_k t^{-d/2-k}`.
fn return_expansion(params: &ModelParams) -> Vec<f64> {
    let d = params.d();
    let df = d as f64;
    let origin = vec![0i32; d];
    large_time_coefficients(&origin, EXPANSION_ORDER + 1)
        .into_iter()
        .enumerate()
        .map(|(k, b)| (2.0 * PI / df).powf(-0.5 * df) * b * df.powi(k as i32))
        .collect()
}

fn head_length(params: &ModelParams) -> u64 {
    // Past t = 200·d the expansion of p_t(0) is accurate to machine precision.
    2000u64.max((200.0 * params.d() as f64 / params.beta()).ceil() as u64)
}

/// `Σ_{j>n0} e^{-aj} j^{-s} p_{βj}(0)`; requires convergence
/// (`a > 0` or `s + d/2 > 1`).
pub(crate) fn series_from(params: &ModelParams, a: f64, s: f64, n0: u64) -> SeriesValue {
    let beta = params.beta();
    let big_j = head_length(params).max(n0);
    let ratio = (-a).exp();
    let mut sum = 0.0;
    let mut j = n0 + 1;
    while j <= big_j {
        let jf = j as f64;
        let term = (-a * jf).exp() * jf.powf(-s) * return_probability(params, beta * jf);
        sum += term;
        // Terms are decreasing in j, so the rest is at most a geometric series.
        if a > 0.0 {
            let rest = term * ratio / (1.0 - ratio);
            if rest < 1e-17 * sum || rest == 0.0 {
                return SeriesValue { value: sum, error_bound: rest };
            }
        }
        j += 1;
    }
    let tail = euler_maclaurin_tail(params, a, s, big_j);
    SeriesValue { value: sum + tail.value, error_bound: tail.error_bound + 1e-15 * sum }
}

/// `Σ_{j>J} h(j)` for `h(t) = e^{-at} t^{-s} p_{βt}(0)` from the large-time
/// expansion, via Euler–Maclaurin.
fn euler_maclaurin_tail(params: &ModelParams, a: f64, s: f64, big_j: u64) -> SeriesValue {
    let beta = params.beta();
    let half_d = 0.5 * params.d() as f64;
    let coeffs = return_expansion(params);
    let jf = big_j as f64;
    let mut value = 0.0;
    let mut last_correction = 0.0;
    let mut omitted = 0.0;
    for (k, &ak) in coeffs.iter().enumerate() {
        let q = s + half_d + k as f64;
        let c = ak * beta.powf(-half_d - k as f64);
        let mut part = exp_power_integral(a, q, jf) - 0.5 * exp_power(a, q, jf, 0);
        for (m, b) in quad::BERNOULLI_EVEN.iter().take(4).enumerate() {
            let order = 2 * m + 1;
            let corr = b / factorial(order + 1) * exp_power(a, q, jf, order);
            part -= corr;
            if m == 3 {
                last_correction += (c * corr).abs();
            }
        }
        if k == EXPANSION_ORDER {
            omitted = (c * part).abs();
        } else {
            value += c * part;
        }
    }
    SeriesValue { value, error_bound: 2.0 * omitted + last_correction }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `d^n/dt^n [e^{-at} t^{-q}]` at `t`.
fn exp_power(a: f64, q: f64, t: f64, n: usize) -> f64 {
    let base = (-a * t).exp();
    let mut total = 0.0;
    let mut binom = 1.0;
    for m in 0..=n {
        // (t^{-q})^{(m)} = (-1)^m q(q+1)...(q+m-1) t^{-q-m}
        let rising: f64 = (0..m).map(|i| q + i as f64).product();
        let power_part = if m % 2 == 0 { 1.0 } else { -1.0 } * rising * t.powf(-q - m as f64);
        let exp_part = (-a).powi((n - m) as i32);
        total += binom * exp_part * power_part;
        binom = binom * (n - m) as f64 / (m + 1) as f64;
    }
    base * total
}

/// `∫_J^∞ e^{-at} t^{-q} dt`.
fn exp_power_integral(a: f64, q: f64, big_j: f64) -> f64 {
    if a == 0.0 {
        return big_j.powf(1.0 - q) / (q - 1.0);
    }
    let aj = a * big_j;
    if aj > 700.0 {
        return 0.0;
    }
    // t = J e^y turns the integrand into exp(-aJ e^y - (q-1) y).
    let mut upper = (800.0 / aj).ln().max(0.0) + 2.0;
    if q > 1.0 {
        upper = upper.min(800.0 / (q - 1.0) + 2.0);
    }
    big_j.powf(1.0 - q)
        * quad::integrate_graded(0.0, upper, 0.25, |y| (-aj * y.exp() - (q - 1.0) * y).exp())
}

fn check_mu(mu: f64) -> Result<f64> {
    if mu <= 0.0 && mu.is_finite() {
        Ok(-mu)
    } else {
        Err(Error::InvalidParameter(format!("chemical potential must be finite and <= 0, got {mu}")))
    }
}

fn density_series(params: &ModelParams, mu: f64) -> Result<SeriesValue> {
    let a = check_mu(mu)? * params.beta();
    if a == 0.0 {
        params.require_transient("the critical density")?;
    }
    let s = series_from(params, a, 0.0, 0);
    Ok(SeriesValue { value: params.beta() * s.value, error_bound: params.beta() * s.error_bound })
}

/// `ρ_c = β Σ_{j≥1} p_{βj}(0)`.
pub fn critical_density(params: &ModelParams, tol: f64) -> Result<f64> {
    params.require_transient("the critical density")?;
    density_series(params, 0.0)?.within(tol)
}

/// `ρ(μ) = β Σ_j e^{βμj} p_{βj}(0)`.
pub fn rho(params: &ModelParams, mu: f64, tol: f64) -> Result<f64> {
    density_series(params, mu)?.within(tol)
}

/// `M(μ) = Σ_j e^{βμj} j^{-1} p_{βj}(0)`, the loop mass per site.
pub fn m_mass(params: &ModelParams, mu: f64, tol: f64) -> Result<f64> {
    let a = check_mu(mu)? * params.beta();
    series_from(params, a, 1.0, 0).within(tol)
}

/// `c_2 = M(0)`.
pub fn loop_mass(params: &ModelParams) -> Result<f64> {
    m_mass(params, 0.0, DEFAULT_TOL)
}

/// Independent evaluation of `ρ_c`: exact head up to `10^4` plus the
/// large-time expansion summed with Hurwitz zeta functions.
pub fn critical_density_zeta(params: &ModelParams) -> Result<f64> {
    params.require_transient("the critical density")?;
    let beta = params.beta();
    let half_d = 0.5 * params.d() as f64;
    let head_end = 10_000u64.max((200.0 * params.d() as f64 / beta).ceil() as u64);
    let head: f64 = (1..=head_end).map(|j| return_probability(params, beta * j as f64)).sum();
    let tail: f64 = return_expansion(params)
        .iter()
        .take(EXPANSION_ORDER)
        .enumerate()
        .map(|(k, ak)| {
            let q = half_d + k as f64;
            ak * beta.powf(-q) * quad::hurwitz_zeta(q, head_end as f64 + 1.0)
        })
        .sum();
    Ok(beta * (head + tail))
}

/// `M[ω(0) = 0, ℘ > n] = Σ_{j>n} j^{-1} p_{βj}(0)` at `μ = 0`.
pub fn tail_mass(params: &ModelParams, n: u64) -> Result<f64> {
    params.require_transient("the long-loop tail at mu = 0")?;
    if params.mu() != 0.0 {
        return Err(Error::InvalidParameter("tail_mass is defined at mu = 0".into()));
    }
    Ok(series_from(params, 0.0, 1.0, n).value)
}

/// Limit of `n^{d/2} · tail_mass(n)`: `c_1 β^{-d/2} / (d/2)` with
/// `c_1 = (d/(2π))^{d/2}`.
pub fn tail_constant(params: &ModelParams) -> f64 {
    let half_d = 0.5 * params.d() as f64;
    (params.d() as f64 / (2.0 * PI)).powf(half_d) * params.beta().powf(-half_d) / half_d
}

/// Markovian loop mass of loops through the origin longer than `βn`:
/// `∫_{βn}^∞ t^{-1} p_t(0) dt`.
pub fn markov_tail_mass(params: &ModelParams, n: u64) -> Result<f64> {
    params.require_transient("the Markovian long-loop tail")?;
    if n == 0 {
        return Err(Error::Divergent("the Markovian loop mass at the origin is infinite".into()));
    }
    let t0 = params.beta() * n as f64;
    let t1 = t0.max(200.0 * params.d() as f64);
    let head = if t1 > t0 {
        quad::integrate_graded(t0, t1, t0.max(1.0), |t| return_probability(params, t) / t)
    } else {
        0.0
    };
    let half_d = 0.5 * params.d() as f64;
    let tail: f64 = return_expansion(params)
        .iter()
        .take(EXPANSION_ORDER)
        .enumerate()
        .map(|(k, ak)| {
            let q = half_d + k as f64;
            ak * t1.powf(-q) / q
        })
        .sum();
    Ok(head + tail)
}

/// `b(x)`: the unique `μ ≤ 0` with `ρ(μ) = x`, by bisection.
pub fn invert_density(params: &ModelParams, x: f64, tol: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("density must be positive and finite, got {x}")));
    }
    let series_tol = (tol * 1e-2).max(1e-14);
    let transient = params.d() >= 3;
    if transient {
        let rho_c = critical_density(params, series_tol)?;
        if x > rho_c + tol {
            return Err(Error::NoSolution(format!(
                "density {x} exceeds the critical density {rho_c}"
            )));
        }
        if (x - rho_c).abs() < tol {
            return Ok(0.0);
        }
    }
    let mut lo = -1.0;
    while rho(params, lo, series_tol)? >= x {
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::NoSolution(format!("density {x} is below the resolvable range")));
        }
    }
    let mut hi = 0.0f64;
    for _ in 0..4000 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let value = rho(params, mid, series_tol)?;
        if (value - x).abs() < tol {
            return Ok(mid);
        }
        if value < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let residual = (rho(params, mid, series_tol)? - x).abs();
    if residual < tol {
        Ok(mid)
    } else {
        Err(Error::ToleranceUnreachable { requested: tol, achieved: residual })
    }
}

/// `φ(t) = M(μ + t) − M(μ)` for `t ≤ −μ`, `+∞` beyond.
pub fn log_mgf(params: &ModelParams, t: f64) -> Extended {
    let mu = params.mu();
    if t > -mu {
        return Extended::PosInf;
    }
    let shifted = (mu + t).min(0.0);
    let m = |v: f64| series_from(params, -v * params.beta(), 1.0, 0).value;
    Extended::Finite(m(shifted) - m(mu))
}

/// The rate function
/// `φ*(x) = x (b(x) − μ) − M(b(x)) + M(μ)` on `(0, ρ_c]`, `M(μ)` at zero and
/// `+∞` above `ρ_c` (or for negative `x`).
pub fn rate_function(params: &ModelParams, x: f64) -> Extended {
    let mu = params.mu();
    let m = |v: f64| series_from(params, -v * params.beta(), 1.0, 0).value;
    if x < 0.0 || x.is_nan() {
        return Extended::PosInf;
    }
    if x == 0.0 {
        return Extended::Finite(m(mu));
    }
    match invert_density(params, x, 1e-12 * x.max(1.0)) {
        Ok(b) => Extended::Finite(x * (b - mu) - m(b) + m(mu)),
        Err(_) => Extended::PosInf,
    }
}

/// Thermodynamic summary of the free gas at fixed `d` and `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoReport {
    params: ModelParams,
    pub rho_c: Extended,
    pub c2: f64,
}

impl ThermoReport {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let rho_c = if params.d() >= 3 {
            Extended::Finite(critical_density(params, 1e-10)?)
        } else {
            Extended::PosInf
        };
        Ok(ThermoReport { params: *params, rho_c, c2: loop_mass(params)? })
    }

    pub fn rho_of_mu(&self, mu: f64) -> Result<f64> {
        rho(&self.params, mu, 1e-10)
    }

    pub fn m_of_mu(&self, mu: f64) -> Result<f64> {
        m_mass(&self.params, mu, 1e-10)
    }
}
