//! Transition kernels and Green's functions of the rate-one continuous-time
//! simple random walk on `Z^d`.
//!
//! The walk jumps to each of its `2d` neighbours at rate `1/(2d)`, so each
//! coordinate is an independent rate-`1/d` walk on `Z` and
//! `p_t(x) = Π_i e^{-t/d} I_{x_i}(t/d)`.

mod bessel;

pub use bessel::{ive, ln_ive};
#[cfg(test)]
pub(crate) use bessel::ln_factorial;

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::quad;
use std::f64::consts::PI;

/// Dimension, inverse temperature and chemical potential of the free gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    d: usize,
    beta: f64,
    mu: f64,
}

impl ModelParams {
    pub fn new(d: usize, beta: f64, mu: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        if !(mu <= 0.0) || mu.is_infinite() {
            return Err(Error::InvalidParameter(format!("mu must be finite and <= 0, got {mu}")));
        }
        Ok(ModelParams { d, beta, mu })
    }

    /// Critical parameters `mu = 0`.
    pub fn critical(d: usize, beta: f64) -> Result<Self> {
        Self::new(d, beta, 0.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.d, self.beta, mu)
    }

    pub(crate) fn require_transient(&self, what: &str) -> Result<()> {
        if self.d <= 2 {
            Err(Error::Divergent(format!("{what} is infinite in d = {} (recurrent walk)", self.d)))
        } else {
            Ok(())
        }
    }
}

/// `p_t(x)`, the probability that the walk started at the origin is at `x`
/// at time `t`.
pub fn transition_kernel(params: &ModelParams, t: f64, x: &Site) -> Result<f64> {
    x.check_dim(params.d)?;
    if !(t >= 0.0) || t.is_infinite() {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(kernel(params.d, t, x.coords()))
}

/// Unchecked kernel on raw coordinates.
pub(crate) fn kernel(d: usize, t: f64, x: &[i32]) -> f64 {
    let z = t / d as f64;
    x.iter().map(|&n| ive(n as i64, z)).product()
}

/// One coordinate of the kernel: `e^{-z} I_n(z)` at `z = t/d`.
pub fn coordinate_kernel(d: usize, t: f64, n: i64) -> f64 {
    ive(n, t / d as f64)
}

/// `𝔭_t(x) = (2πt)^{-d/2} exp(-|x|²/(2t))`.
pub fn gaussian_kernel(params: &ModelParams, t: f64, x: &[f64]) -> Result<f64> {
    if x.len() != params.d {
        return Err(Error::DimensionMismatch { expected: params.d, got: x.len() });
    }
    if !(t > 0.0) || t.is_infinite() {
        return Err(Error::InvalidParameter(format!("time must be positive and finite, got {t}")));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((2.0 * PI * t).powf(-0.5 * params.d as f64) * (-r2 / (2.0 * t)).exp())
}

/// `p_t(0) / 𝔭_{t/d}(0)`, which tends to one as `t → ∞`.
pub fn kernel_comparison(params: &ModelParams, t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_infinite() {
        return Err(Error::InvalidParameter(format!("time must be positive and finite, got {t}")));
    }
    let d = params.d as f64;
    let z = t / d;
    // Compare in logs; at small t the Gaussian density is huge.
    let ln_p = d * ln_ive(0, z);
    let ln_g = -0.5 * d * (2.0 * PI * z).ln();
    Ok((ln_p - ln_g).exp())
}

/// Coefficients `b_k` of the large-time expansion
/// `p_t(x) ≈ (2πt/d)^{-d/2} Σ_k b_k (d/t)^k`, obtained by multiplying the
/// Hankel expansions of the coordinate kernels.
pub(crate) fn large_time_coefficients(x: &[i32], order: usize) -> Vec<f64> {
    let mut poly = vec![0.0; order];
    poly[0] = 1.0;
    for &n in x.iter() {
        let mu = 4.0 * (n as f64) * (n as f64);
        let mut c = vec![0.0; order];
        c[0] = 1.0;
        for k in 1..order {
            let odd = (2 * k - 1) as f64;
            c[k] = -c[k - 1] * (mu - odd * odd) / (k as f64 * 8.0);
        }
        let mut next = vec![0.0; order];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in c.iter().enumerate().take(order - i) {
                next[i + j] += a * b;
            }
        }
        poly = next;
    }
    poly
}

/// Number of Hankel terms kept in tail integrals.
const TAIL_ORDER: usize = 8;

/// Green's function evaluation with its error certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenValue {
    pub value: f64,
    pub error_bound: f64,
}

/// `G(0, x) = ∫_0^∞ p_t(x) dt` for `d ≥ 3` with total error below `tol`.
///
/// The integral is split at a horizon `T`: the head is done by graded
/// Gauss–Legendre quadrature (error estimated by halving the panels) and the
/// tail by integrating the large-time expansion term by term, with twice the
/// first omitted term as its error bound.
pub fn green_function(params: &ModelParams, x: &Site, tol: f64) -> Result<f64> {
    green_function_certified(params, x, tol).map(|g| g.value)
}

pub fn green_function_certified(params: &ModelParams, x: &Site, tol: f64) -> Result<GreenValue> {
    params.require_transient("the Green's function")?;
    x.check_dim(params.d)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let d = params.d;
    let df = d as f64;
    let xmax = x.coords().iter().map(|c| c.unsigned_abs() as f64).fold(0.0, f64::max);
    let coeffs = large_time_coefficients(x.coords(), TAIL_ORDER + 1);
    let mut horizon = df * (150.0f64).max(20.0 * xmax * xmax);
    let mut best = f64::INFINITY;
    for _ in 0..6 {
        let coarse = quad::integrate_graded(0.0, horizon, 1.0, |t| kernel(d, t, x.coords()));
        let fine = quad::integrate_graded(0.0, horizon, 0.5, |t| kernel(d, t, x.coords()));
        let quad_err = (coarse - fine).abs() + 1e-15 * fine;

        let prefactor = (2.0 * PI / df).powf(-0.5 * df);
        let tail_term = |k: usize| {
            let e = 0.5 * df + k as f64 - 1.0;
            prefactor * coeffs[k] * df.powi(k as i32) * horizon.powf(-e) / e
        };
        let tail: f64 = (0..TAIL_ORDER).map(tail_term).sum();
        let tail_err = 2.0 * tail_term(TAIL_ORDER).abs();
        let err = quad_err + tail_err;
        best = best.min(err);
        if err < tol {
            return Ok(GreenValue { value: fine + tail, error_bound: err });
        }
        horizon *= 4.0;
    }
    Err(Error::ToleranceUnreachable { requested: tol, achieved: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn params(d: usize) -> ModelParams {
        ModelParams::critical(d, 1.0).unwrap()
    }

    fn site(c: &[i32]) -> Site {
        Site::new(c)
    }

    // High-precision references (mpmath, 40 digits).
    #[test]
    fn kernel_matches_reference_values() {
        let cases: [(f64, &[i32], f64); 8] = [
            (1.0, &[0, 0, 0], 0.399_621_141_614_625_398_92),
            (2.0, &[1, 0, 0], 0.059_176_897_450_351_505_779),
            (5.0, &[2, -1, 0], 0.006_192_965_620_205_580_120_3),
            (100.0, &[3, 4, 0], 0.000_228_121_826_749_234_904_96),
            (1000.0, &[10, 0, 5], 8.656_730_021_958_249_601e-6),
            (0.3, &[0, 0, 1], 0.037_273_015_641_293_477_135),
            (60.0, &[7], 0.034_207_043_762_592_771_735),
            (200.0, &[40], 0.000_518_717_303_835_176_812_18),
        ];
        for (t, x, want) in cases {
            let got = transition_kernel(&params(x.len()), t, &site(x)).unwrap();
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
        let one_d = transition_kernel(&params(1), 1.0, &site(&[0])).unwrap();
        assert_relative_eq!(one_d, 0.465_759_607_593_640_436_5, max_relative = 1e-14);
    }

    #[test]
    fn kernel_at_time_zero_is_a_delta() {
        let p = params(3);
        assert_eq!(transition_kernel(&p, 0.0, &site(&[0, 0, 0])).unwrap(), 1.0);
        assert_eq!(transition_kernel(&p, 0.0, &site(&[1, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn kernel_rejects_bad_input() {
        let p = params(3);
        assert_eq!(
            transition_kernel(&p, 1.0, &site(&[0, 0])),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        );
        assert!(transition_kernel(&p, -1.0, &site(&[0, 0, 0])).is_err());
        assert!(gaussian_kernel(&p, 0.0, &[0.0; 3]).is_err());
        assert!(ModelParams::new(3, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(3, 0.0, 0.0).is_err());
    }

    #[test]
    fn normalization_with_tail_bound() {
        for (d, t) in [(1usize, 0.7), (2, 3.0), (3, 2.0), (3, 40.0)] {
            // Per coordinate, P(|X| > R) ≤ 2 e^{-R²/(2(z + R/3))} (Bernstein).
            let z = t / d as f64;
            let r = (z + 12.0 * z.sqrt() + 30.0).ceil() as i32;
            let bound = d as f64 * 2.0 * (-(r as f64).powi(2) / (2.0 * (z + r as f64 / 3.0))).exp();
            let mut total = 0.0;
            let mut x = vec![-r; d];
            loop {
                total += kernel(d, t, &x);
                let mut i = 0;
                while i < d {
                    x[i] += 1;
                    if x[i] <= r {
                        break;
                    }
                    x[i] = -r;
                    i += 1;
                }
                if i == d {
                    break;
                }
            }
            assert!((total - 1.0).abs() < bound + 1e-12, "d={d} t={t}: {total}");
        }
    }

    #[test]
    fn symmetries_hold() {
        let p = params(3);
        let base = kernel(3, 2.5, &[2, -1, 3]);
        for x in [[-2, 1, -3], [3, 2, -1], [-1, 3, 2], [2, 1, 3]] {
            assert_relative_eq!(kernel(3, 2.5, &x), base, max_relative = 1e-14);
        }
        let a = transition_kernel(&p, 7.0, &site(&[1, 2, 0])).unwrap();
        let b = transition_kernel(&p, 7.0, &site(&[-1, -2, 0])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn chapman_kolmogorov() {
        for d in 1..=3usize {
            for (s, t) in [(0.5, 1.5), (2.0, 2.0), (0.1, 1.0)] {
                for x in [[0, 0, 0], [1, 0, 0], [2, -1, 1], [4, 0, 0], [1, 1, 2]] {
                    let x = &x[..d];
                    let r = 24;
                    let mut total = 0.0;
                    let mut y = vec![-r; d];
                    loop {
                        let diff: Vec<i32> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                        total += kernel(d, s, &y) * kernel(d, t, &diff);
                        let mut i = 0;
                        while i < d {
                            y[i] += 1;
                            if y[i] <= r {
                                break;
                            }
                            y[i] = -r;
                            i += 1;
                        }
                        if i == d {
                            break;
                        }
                    }
                    let want = kernel(d, s + t, x);
                    assert!((total - want).abs() < 1e-10, "d={d} s={s} t={t} x={x:?}");
                }
            }
        }
    }

    #[test]
    fn factorizes_over_coordinates() {
        let x = [3i32, -2, 1];
        let t = 4.2;
        let prod: f64 = x.iter().map(|&n| coordinate_kernel(3, t, n as i64)).product();
        assert!((kernel(3, t, &x) - prod).abs() < 1e-12);
    }

    #[test]
    fn gaussian_values() {
        let p3 = params(3);
        assert_relative_eq!(gaussian_kernel(&p3, 1.0, &[0.0; 3]).unwrap(), (2.0 * PI).powf(-1.5));
        assert_relative_eq!(gaussian_kernel(&params(1), 2.0, &[0.0]).unwrap(), (4.0 * PI).powf(-0.5));
        assert_relative_eq!(
            gaussian_kernel(&p3, 10.0, &[1.0, 1.0, 1.0]).unwrap(),
            0.001_728_168_262_679_375_273_05,
            max_relative = 1e-14
        );
    }

    #[test]
    fn local_limit_ratio() {
        for d in [1, 3] {
            let r = kernel_comparison(&params(d), 1e4).unwrap();
            assert!((r - 1.0).abs() < 0.02, "d={d}: {r}");
        }
        let small = kernel_comparison(&params(3), 0.01).unwrap();
        assert!(small.is_finite() && small > 0.0);
    }

    #[test]
    fn large_time_expansion_matches_kernel() {
        let x = [3, 1, 0];
        let c = large_time_coefficients(&x, 8);
        let t = 600.0f64;
        let approx: f64 = c.iter().enumerate().map(|(k, b)| b * (3.0 / t).powi(k as i32)).sum::<f64>()
            * (2.0 * PI * t / 3.0).powf(-1.5);
        assert_relative_eq!(approx, kernel(3, t, &x), max_relative = 1e-12);
    }

    #[test]
    fn green_function_reference_values() {
        let p = params(3);
        let g0 = green_function_certified(&p, &site(&[0, 0, 0]), 1e-10).unwrap();
        assert!(g0.error_bound < 1e-10);
        assert_relative_eq!(g0.value, 1.516_386_059_151_978_018, max_relative = 1e-9);
        assert_relative_eq!(
            green_function(&p, &site(&[1, 0, 0]), 1e-10).unwrap(),
            0.516_386_059_151_978_018,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            green_function(&p, &site(&[2, 1, 0]), 1e-10).unwrap(),
            0.215_589_620_840_940_532_2,
            max_relative = 1e-9
        );
        let far = green_function(&p, &site(&[40, 0, 0]), 1e-8).unwrap();
        assert!(far < 0.015 && far > 0.0);
    }

    #[test]
    fn green_function_requires_transience() {
        assert!(matches!(green_function(&params(2), &site(&[0, 0]), 1e-6), Err(Error::Divergent(_))));
        assert!(matches!(
            green_function(&params(3), &site(&[0, 0, 0]), 1e-30),
            Err(Error::ToleranceUnreachable { .. })
        ));
    }

    /// Expected time the walk spends at `e_1`, estimated by counting visits of
    /// the jump chain (each visit lasts one unit on average) until the walk
    /// leaves a ball of radius `R`, plus the continuum estimate of the visits
    /// still to come from the exit point.
    #[test]
    fn green_function_matches_occupation_time() {
        let mut rng = crate::rng::stream(17, crate::rng::ModuleTag::Kernels, 0, 0);
        let walks = 20_000;
        let radius2 = 25.0f64 * 25.0;
        let c3 = 3.0 / (2.0 * PI);
        let mut samples = Vec::with_capacity(walks);
        for _ in 0..walks {
            let mut x = [0i32; 3];
            let mut visits = 0.0;
            loop {
                let step = rng.random_range(0..6u8);
                x[(step / 2) as usize] += if step % 2 == 0 { 1 } else { -1 };
                if x == [1, 0, 0] {
                    visits += 1.0;
                }
                let r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) as f64;
                if r2 > radius2 {
                    let dx = [(x[0] - 1) as f64, x[1] as f64, x[2] as f64];
                    visits += c3 / (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt();
                    break;
                }
            }
            samples.push(visits);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let g = green_function(&params(3), &site(&[1, 0, 0]), 1e-10).unwrap();
        assert!((mean - g).abs() < 3.0 * se, "mc {mean} ± {se} vs {g}");
    }
}
