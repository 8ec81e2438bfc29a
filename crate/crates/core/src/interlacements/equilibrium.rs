//! Escape probabilities and capacities of finite sets.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernels::ModelParams;
use crate::lattice::{Site, SiteSet, Step};

/// Leading large-distance behaviour of the Green function,
/// `G(x) ≈ d Γ(d/2 − 1) / (2 π^{d/2}) |x|^{2−d}`.
pub fn green_asymptotic(d: usize, r: f64) -> f64 {
    let df = d as f64;
    df * gamma(df / 2.0 - 1.0) / (2.0 * std::f64::consts::PI.powf(df / 2.0)) * r.powf(2.0 - df)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumMethod {
    LinearSolve,
    MonteCarlo,
}

/// Equilibrium measure `e_K(z) = P_z(H̃_K = ∞)` (return counted after the
/// first jump) and capacity `Cap(K) = Σ_z e_K(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub window: SiteSet,
    /// `e_K(z)` in the order of `window.sites()`.
    pub escape: Vec<f64>,
    pub capacity: f64,
    pub method: EquilibriumMethod,
    /// Error bound on the capacity: truncation estimate for the solver,
    /// one standard error for Monte Carlo.
    pub error: f64,
    /// Per-site standard errors (Monte Carlo) or the capacity bound spread
    /// uniformly (solver).
    pub escape_error: Vec<f64>,
}

impl EquilibriumData {
    pub fn escape_at(&self, z: &Site) -> Option<f64> {
        self.window.index_of(z.coords()).map(|i| self.escape[i])
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }
}

fn check_set(k: &SiteSet, params: &ModelParams) -> Result<()> {
    if k.dim() != params.d() {
        return Err(Error::DimensionMismatch { expected: params.d(), got: k.dim() });
    }
    if params.d() <= 2 {
        return Err(Error::InvalidParameter(format!(
            "finite sets have zero capacity in the recurrent dimension d = {}",
            params.d()
        )));
    }
    if k.is_empty() {
        return Err(Error::EmptyInput("window"));
    }
    Ok(())
}

/// Solves for the hitting probability `h = P_·(H_K < ∞)` on the ball of radius
/// `domain_radius` around the centre of `K` by conjugate gradients, with
/// exterior values `Cap(K) · G(|y − c|)`. `Cap(K)` enters linearly and is
/// eliminated exactly; the error bound is the change from the half-radius
/// solve.
pub fn equilibrium_solve(k: &SiteSet, params: &ModelParams, domain_radius: f64) -> Result<EquilibriumData> {
    check_set(k, params)?;
    let (escape, capacity) = solve_on_ball(k, domain_radius)?;
    let coarse_radius = 0.5 * domain_radius;
    let error = if coarse_radius >= k.radius() + 2.0 {
        let (_, coarse) = solve_on_ball(k, coarse_radius)?;
        (capacity - coarse).abs()
    } else {
        capacity
    };
    let per_site = error / k.len() as f64;
    Ok(EquilibriumData {
        window: k.clone(),
        escape,
        capacity,
        method: EquilibriumMethod::LinearSolve,
        error,
        escape_error: vec![per_site; k.len()],
    })
}

fn solve_on_ball(k: &SiteSet, radius: f64) -> Result<(Vec<f64>, f64)> {
    let d = k.dim();
    if radius < k.radius() + 2.0 {
        return Err(Error::InvalidParameter(format!(
            "domain radius {radius} must exceed the window radius {} by at least 2",
            k.radius()
        )));
    }
    let centre = k.center();
    let half = radius.ceil() as i64 + 1;
    let side = (2 * half + 1) as usize;
    let total = side.checked_pow(d as u32).filter(|&n| n <= 1 << 31).ok_or_else(|| {
        Error::InvalidParameter(format!("domain radius {radius} is too large in dimension {d}"))
    })?;
    let strides: Vec<usize> = (0..d).map(|i| side.pow(i as u32)).collect();
    let r2 = radius * radius;

    // Grid cell classification: unknown index, or a marker.
    const IN_K: u32 = u32::MAX;
    const OUTSIDE: u32 = u32::MAX - 1;
    let mut label = vec![OUTSIDE; total];
    let mut dist = vec![0.0f64; total];
    let mut unknown_cells = Vec::new();
    let mut offs = vec![0i64; d];
    for (cell, (lab, dst)) in label.iter_mut().zip(dist.iter_mut()).enumerate() {
        let mut c = cell;
        let mut q = 0.0;
        for o in offs.iter_mut() {
            *o = (c % side) as i64 - half;
            c /= side;
            q += (*o * *o) as f64;
        }
        *dst = q.sqrt();
        let coords: Vec<i32> = offs.iter().zip(centre.coords()).map(|(o, c)| *o as i32 + c).collect();
        if k.contains(&coords) {
            *lab = IN_K;
        } else if q <= r2 {
            *lab = unknown_cells.len() as u32;
            unknown_cells.push(cell);
        }
    }
    let n = unknown_cells.len();
    let inv = 1.0 / (2 * d) as f64;
    let mut nbr = Vec::with_capacity(n * 2 * d);
    let mut b_k = vec![0.0; n];
    let mut b_out = vec![0.0; n];
    for (i, &cell) in unknown_cells.iter().enumerate() {
        for &s in &strides {
            for m in [cell + s, cell - s] {
                match label[m] {
                    IN_K => {
                        b_k[i] += inv;
                        nbr.push(u32::MAX);
                    }
                    OUTSIDE => {
                        b_out[i] += inv * green_asymptotic(d, dist[m]);
                        nbr.push(u32::MAX);
                    }
                    j => nbr.push(j),
                }
            }
        }
    }
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..n {
            let mut acc = 0.0;
            for &j in &nbr[i * 2 * d..(i + 1) * 2 * d] {
                if j != u32::MAX {
                    acc += x[j as usize];
                }
            }
            y[i] = x[i] - inv * acc;
        }
    };
    let h0 = conjugate_gradient(&apply, &b_k);
    let h1 = conjugate_gradient(&apply, &b_out);

    // e(z) = a_z − Cap · b_z; summing gives Cap = A / (1 + B).
    let mut a = Vec::with_capacity(k.len());
    let mut b = Vec::with_capacity(k.len());
    for z in k.sites() {
        let mut cell = 0usize;
        for (i, (zc, cc)) in z.coords().iter().zip(centre.coords()).enumerate() {
            cell += ((zc - cc) as i64 + half) as usize * strides[i];
        }
        let (mut outside_k, mut h0_sum, mut bz) = (0usize, 0.0, 0.0);
        for &s in &strides {
            for m in [cell + s, cell - s] {
                match label[m] {
                    IN_K => {}
                    OUTSIDE => unreachable!("window neighbours lie inside the ball"),
                    j => {
                        outside_k += 1;
                        h0_sum += h0[j as usize];
                        bz += inv * h1[j as usize];
                    }
                }
            }
        }
        let az = inv * (outside_k as f64 - h0_sum);
        a.push(az);
        b.push(bz);
    }
    let cap = a.iter().sum::<f64>() / (1.0 + b.iter().sum::<f64>());
    let escape = a.iter().zip(&b).map(|(az, bz)| (az - cap * bz).clamp(0.0, 1.0)).collect();
    Ok((escape, cap))
}

fn conjugate_gradient<F: Fn(&[f64], &mut [f64])>(apply: &F, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut rr = dot(&r, &r);
    let stop = 1e-26 * rr.max(f64::MIN_POSITIVE);
    for _ in 0..10 * n + 100 {
        if rr <= stop {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    x
}

/// Monte Carlo estimate of `e_K`: walks from each `z ∈ K` make one jump and
/// then run until they return to `K` or leave the ball of radius
/// `escape_radius` around the centre of `K`. An escape at `y` is discounted
/// by the return probability `Cap(K) G(|y − c|)`, with `Cap(K)` solved
/// self-consistently.
pub fn equilibrium_mc<R: Rng + ?Sized>(
    k: &SiteSet,
    params: &ModelParams,
    n_walks: u64,
    escape_radius: f64,
    rng: &mut R,
) -> Result<EquilibriumData> {
    check_set(k, params)?;
    if n_walks == 0 {
        return Err(Error::InvalidParameter("need at least one walk per site".into()));
    }
    if escape_radius <= k.radius() + 1.0 {
        return Err(Error::InvalidParameter("escape radius must exceed the window radius".into()));
    }
    let d = k.dim();
    let centre = k.center();
    let r2 = escape_radius * escape_radius;
    let near2 = (k.radius() + 1.0).powi(2);
    let mut p = Vec::with_capacity(k.len());
    let mut g_sum = 0.0;
    let mut escapes_total = 0u64;
    for z in k.sites() {
        let mut escapes = 0u64;
        for _ in 0..n_walks {
            let mut y = z.clone();
            loop {
                y.apply(Step::random(d, rng));
                let q = dist2(&y, &centre);
                if q <= near2 && k.contains(y.coords()) {
                    break;
                }
                if q > r2 {
                    escapes += 1;
                    g_sum += green_asymptotic(d, q.sqrt());
                    break;
                }
            }
        }
        escapes_total += escapes;
        p.push(escapes as f64 / n_walks as f64);
    }
    let g_bar = if escapes_total > 0 { g_sum / escapes_total as f64 } else { 0.0 };
    let raw: f64 = p.iter().sum();
    let cap = raw / (1.0 + raw * g_bar);
    let factor = 1.0 - cap * g_bar;
    let escape: Vec<f64> = p.iter().map(|pz| pz * factor).collect();
    let escape_error: Vec<f64> =
        p.iter().map(|pz| (pz * (1.0 - pz) / n_walks as f64).sqrt() * factor).collect();
    let error = escape_error.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(EquilibriumData {
        window: k.clone(),
        capacity: escape.iter().sum(),
        escape,
        method: EquilibriumMethod::MonteCarlo,
        error,
        escape_error,
    })
}

pub(crate) fn dist2(y: &Site, c: &Site) -> f64 {
    y.coords().iter().zip(c.coords()).map(|(a, b)| ((a - b) as f64).powi(2)).sum()
}

/// `e_K` restricted to nonzero sites, as a lookup by site.
pub fn escape_map(eq: &EquilibriumData) -> HashMap<Site, f64> {
    eq.window.sites().iter().cloned().zip(eq.escape.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels;
    use crate::rng::{stream, ModuleTag};

    fn p3() -> ModelParams {
        ModelParams::critical(3, 1.0).unwrap()
    }

    #[test]
    fn green_asymptotic_in_three_dimensions() {
        assert!((green_asymptotic(3, 2.0) - 3.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-12);
        let exact = kernels::green_function(&p3(), &Site::new(&[12, 0, 0]), 1e-10).unwrap();
        assert!((exact / green_asymptotic(3, 12.0) - 1.0).abs() < 0.01);
    }

    #[test]
    fn single_point_escape_is_one_over_green() {
        let k = SiteSet::point(Site::origin(3));
        let eq = equilibrium_solve(&k, &p3(), 20.0).unwrap();
        let g0 = kernels::green_function(&p3(), &Site::origin(3), 1e-12).unwrap();
        assert!((eq.capacity - 1.0 / g0).abs() < 1e-4, "{} vs {}", eq.capacity, 1.0 / g0);
        assert!((eq.capacity / 0.6595 - 1.0).abs() < 0.005);
        assert!(eq.error < 1e-3);
    }

    #[test]
    fn capacity_is_monotone_and_subadditive() {
        let p = p3();
        let c0 = equilibrium_solve(&SiteSet::point(Site::origin(3)), &p, 16.0).unwrap().capacity;
        let b1 = equilibrium_solve(&SiteSet::ball(3, 1.0), &p, 16.0).unwrap();
        let b2 = equilibrium_solve(&SiteSet::ball(3, 2.0), &p, 16.0).unwrap().capacity;
        assert!(c0 < b1.capacity && b1.capacity < b2);
        // Interior site of B_1 never escapes.
        assert_eq!(b1.escape_at(&Site::origin(3)), Some(0.0));
        let pair = SiteSet::new(3, [Site::origin(3), Site::new(&[3, 0, 0])]).unwrap();
        let cp = equilibrium_solve(&pair, &p, 16.0).unwrap().capacity;
        assert!(cp <= 2.0 * c0 && cp > c0);
    }

    #[test]
    fn distant_pair_has_twice_the_capacity() {
        let p = p3();
        let c0 = equilibrium_solve(&SiteSet::point(Site::origin(3)), &p, 20.0).unwrap().capacity;
        let pair = SiteSet::new(3, [Site::origin(3), Site::new(&[50, 0, 0])]).unwrap();
        let cp = equilibrium_solve(&pair, &p, 45.0).unwrap().capacity;
        assert!((cp / (2.0 * c0) - 1.0).abs() < 0.02, "{cp} vs {}", 2.0 * c0);
    }

    #[test]
    fn monte_carlo_agrees_with_the_solver() {
        let p = p3();
        let k = SiteSet::point(Site::origin(3));
        let solved = equilibrium_solve(&k, &p, 16.0).unwrap();
        let mut rng = stream(1, ModuleTag::Capacity, 0, 0);
        let mc = equilibrium_mc(&k, &p, 20_000, 8.0, &mut rng).unwrap();
        let tol = 3.0 * (mc.error.powi(2) + solved.error.powi(2)).sqrt();
        assert!((mc.capacity - solved.capacity).abs() < tol, "{} vs {}", mc.capacity, solved.capacity);
        let mc = equilibrium_mc(&SiteSet::ball(3, 1.0), &p, 2_000, 6.0, &mut rng).unwrap();
        assert_eq!(mc.escape[mc.window.index_of(&[0, 0, 0]).unwrap()], 0.0);
    }

    #[test]
    fn recurrent_dimensions_are_rejected() {
        let p = ModelParams::critical(2, 1.0).unwrap();
        assert!(equilibrium_solve(&SiteSet::point(Site::origin(2)), &p, 10.0).is_err());
    }
}
