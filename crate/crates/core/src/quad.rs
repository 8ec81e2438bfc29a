//! Gauss–Legendre quadrature and a few series helpers shared by the numerics.

use std::sync::OnceLock;

const GL_ORDER: usize = 24;

fn gl_table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫_a^b f` with one 24-point Gauss–Legendre panel.
pub(crate) fn gl_panel<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> f64 {
    let (nodes, weights) = gl_table();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// `∫_a^b f` over panels whose widths grow geometrically from `a` (for
/// integrands that vary fastest near the left end), at most `first` wide at
/// the start.
pub(crate) fn integrate_graded<F: FnMut(f64) -> f64>(a: f64, b: f64, first: f64, mut f: F) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    let mut width = first.max(1e-12);
    while lo < b {
        let hi = (lo + width).min(b);
        total += gl_panel(lo, hi, &mut f);
        lo = hi;
        width = (hi - a).max(width);
    }
    total
}

/// `∫_a^b f` over `panels` equal panels.
pub(crate) fn integrate_uniform<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gl_panel(a + i as f64 * h, a + (i + 1) as f64 * h, &mut f)).sum()
}

/// Bernoulli numbers `B_2, B_4, ..., B_16`.
pub(crate) const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{-s}` for `s > 1`, `q > 0`, by
/// Euler–Maclaurin with a direct head of `N` terms.
pub(crate) fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    assert!(s > 1.0 && q > 0.0);
    let n = 12usize.max((20.0 - q).ceil() as usize);
    let head: f64 = (0..n).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + n as f64;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // B_{2i}/(2i)! · s(s+1)…(s+2i-2) · a^{-s-2i+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut pow = a.powf(-s - 1.0);
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = 2 * i + 2;
        let term = b / fact * rising * pow;
        tail += term;
        rising *= (s + k as f64 - 1.0) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
        pow /= a * a;
    }
    head + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = gl_panel(0.0, 2.0, &mut |x: f64| x.powi(7) - 3.0 * x * x);
        assert!((v - (256.0 / 8.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((hurwitz_zeta(2.0, 1.0) - pi * pi / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(1.5, 1.0) - 2.612_375_348_685_488_3).abs() < 1e-13);
        assert!((hurwitz_zeta(4.0, 1.0) - pi.powi(4) / 90.0).abs() < 1e-14);
        // ζ(s, q) - ζ(s, q + 1) = q^{-s}
        assert!((hurwitz_zeta(2.5, 0.3) - hurwitz_zeta(2.5, 1.3) - 0.3f64.powf(-2.5)).abs() < 1e-12);
    }

    #[test]
    fn graded_integration_of_decaying_function() {
        let v = integrate_graded(0.0, 200.0, 0.5, |t| (-t).exp());
        assert!((v - 1.0).abs() < 1e-13);
    }
}
