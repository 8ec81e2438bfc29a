//! Small statistics toolkit used by the tests and experiments.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl Estimate {
    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_err
        }
    }
}

pub fn mean_and_se(xs: &[f64]) -> Result<Estimate> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(Estimate { mean, std_err: (var / n).sqrt(), n: xs.len() })
}

/// Proportion of successes with its binomial standard error.
pub fn proportion(successes: u64, trials: u64) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::EmptyInput("trials"));
    }
    let p = successes as f64 / trials as f64;
    Ok(Estimate { mean: p, std_err: (p * (1.0 - p) / trials as f64).sqrt(), n: trials as usize })
}

/// Variance-to-mean ratio; 1 for Poisson counts.
pub fn poisson_dispersion(counts: &[f64]) -> Result<f64> {
    let e = mean_and_se(counts)?;
    if e.mean == 0.0 {
        return Err(Error::EmptyInput("counts with positive mean"));
    }
    let var = e.std_err * e.std_err * e.n as f64;
    Ok(var / e.mean)
}

/// Pearson goodness of fit against expected counts (same total assumed).
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> Result<TestResult> {
    if observed.is_empty() || observed.len() != expected.len() {
        return Err(Error::EmptyInput("matching observed and expected bins"));
    }
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (o, e) in observed.iter().zip(expected) {
        if *e > 0.0 {
            stat += (o - e).powi(2) / e;
            bins += 1;
        } else if *o > 0.0 {
            stat = f64::INFINITY;
        }
    }
    let dof = (bins.max(2) - 1) as f64;
    Ok(TestResult { statistic: stat, dof, p_value: chi_square_sf(stat, dof) })
}

/// Two-sample chi-square test of homogeneity on binned counts.
pub fn chi_square_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::EmptyInput("matching bins"));
    }
    let na: f64 = a.iter().sum();
    let nb: f64 = b.iter().sum();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::EmptyInput("samples"));
    }
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (x, y) in a.iter().zip(b) {
        if x + y > 0.0 {
            stat += (ka * x - kb * y).powi(2) / (x + y);
            bins += 1;
        }
    }
    let dof = (bins.max(2) - 1) as f64;
    Ok(TestResult { statistic: stat, dof, p_value: chi_square_sf(stat, dof) })
}

fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    if !stat.is_finite() {
        return 0.0;
    }
    ChiSquared::new(dof).map(|c| c.sf(stat)).unwrap_or(0.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(TestResult { statistic: d, dof: en * en, p_value: kolmogorov_sf(lambda) })
}

/// Kolmogorov–Smirnov test of a weighted sample `(a, wa)` against an
/// unweighted sample `b`. The weighted side enters the p-value through its
/// effective size `(Σw)²/Σw²`.
pub fn ks_weighted(a: &[f64], wa: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() || a.len() != wa.len() {
        return Err(Error::EmptyInput("samples"));
    }
    let total: f64 = wa.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyInput("positive weights"));
    }
    let mut x: Vec<(f64, f64)> = a.iter().copied().zip(wa.iter().map(|w| w / total)).collect();
    x.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut y = b.to_vec();
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut fa = 0.0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].0.min(y[j]);
        while i < n && x[i].0 <= v {
            fa += x[i].1;
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((fa - j as f64 / m as f64).abs());
    }
    let n_eff = 1.0 / x.iter().map(|p| p.1 * p.1).sum::<f64>();
    let en = (n_eff * m as f64 / (n_eff + m as f64)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(TestResult { statistic: d, dof: en * en, p_value: kolmogorov_sf(lambda) })
}

/// Weighted mean with a delta-method standard error.
pub fn weighted_mean(xs: &[f64], ws: &[f64]) -> Result<Estimate> {
    if xs.is_empty() || xs.len() != ws.len() {
        return Err(Error::EmptyInput("sample"));
    }
    let total: f64 = ws.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptyInput("positive weights"));
    }
    let mean = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = xs.iter().zip(ws).map(|(x, w)| (w * (x - mean)).powi(2)).sum::<f64>() / (total * total);
    Ok(Estimate { mean, std_err: var.sqrt(), n: xs.len() })
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical quantile by linear interpolation (`q ∈ [0, 1]`).
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("sample"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}
