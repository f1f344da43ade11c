//! The Harnack functional `H_g(d, x)`: the largest ratio `sup u / inf u` on
//! `B_{d/2}(x)` over positive harmonic `u` on `B_d(x)`.
//!
//! On rotationally symmetric surfaces the geodesic ball `B_d(x)` is a disc in
//! the conformal chart at `x`, and harmonicity is conformally invariant, so
//! the problem moves to the unit disc with the concentric disc of radius
//! `theta`. Every positive harmonic function there is a Poisson average of
//! boundary point masses, and for an average
//! `u(p) / u(q) <= max_omega P(p, omega) / P(q, omega)`, so point masses
//! attain the supremum.
//!
//! Curvature convention: the expansion `9 - 3 K d^2 + 3/8 K^2 d^4` is written
//! for the complex normalization `Ric_{z zbar} = K g_{z zbar}`, in which the
//! Gauss curvature is `2 K`. [`functional_curvature`] converts.

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::model::ModelSpace;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::TAU;

pub const MIN_RESOLUTION: usize = 32;
/// Chart validity bound on `phi = sqrt(|k|) d / 2`.
pub const PHI_MAX: f64 = 1.0;

/// `P(x, omega) = (1 - |x|^2) / |x - e^{i omega}|^2`.
pub fn poisson_kernel_disc(x: [f64; 2], omega: f64) -> Result<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if !(r2 < 1.0) {
        return Err(LabError::InvalidParam(format!("|x| = {} must be < 1", r2.sqrt())));
    }
    let (dx, dy) = (x[0] - omega.cos(), x[1] - omega.sin());
    Ok((1.0 - r2) / (dx * dx + dy * dy))
}

/// Curvature `K` of the expansion for a model of Gauss curvature `k`: `k / 2`.
pub fn functional_curvature(m: &ModelSpace) -> f64 {
    0.5 * m.curvature()
}

fn phi(m: &ModelSpace, d: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(LabError::InvalidParam(format!("radius d = {d} must be positive")));
    }
    let p = m.curvature().abs().sqrt() * d / 2.0;
    if p >= PHI_MAX {
        return Err(LabError::Chart(format!("sqrt(|k|) d / 2 = {p} exceeds {PHI_MAX}")));
    }
    Ok(p)
}

/// Conformal radius ratio of `B_{d/2}` to `B_d`, from the stereographic chart.
pub fn theta_ratio(m: &ModelSpace, d: f64) -> Result<f64> {
    let p = phi(m, d)?;
    Ok(match m {
        ModelSpace::Sphere { .. } => (p / 2.0).tan() / p.tan(),
        ModelSpace::Hyperbolic { .. } => (p / 2.0).tanh() / p.tanh(),
        _ => 0.5,
    })
}

/// `((1 + theta) / (1 - theta))^2`, which is `9`, `(1 + 2 cos phi)^2` or
/// `(1 + 2 cosh phi)^2`.
pub fn hfun_closed_form(m: &ModelSpace, d: f64) -> Result<f64> {
    let p = phi(m, d)?;
    Ok(match m {
        ModelSpace::Sphere { .. } => (1.0 + 2.0 * p.cos()).powi(2),
        ModelSpace::Hyperbolic { .. } => (1.0 + 2.0 * p.cosh()).powi(2),
        _ => 9.0,
    })
}

/// `theta = exp(-int_{d/2}^{d} drho / psi(rho))` by Simpson's rule on the
/// polar metric coefficient: the conformal radius obeys `d ln r / d rho = 1/psi`.
pub fn theta_quadrature(m: &ModelSpace, d: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let (a, h) = (0.5 * d, 0.5 * d / n as f64);
    let mut s = 1.0 / m.metric_coeff(a) + 1.0 / m.metric_coeff(d);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w / m.metric_coeff(a + h * i as f64);
    }
    (-s * h / 3.0).exp()
}

/// Points of the disc of radius `theta`: radii `theta i / n`, angles `2 pi j / n`.
pub fn ball_samples(theta: f64, n: usize) -> Vec<[f64; 2]> {
    let mut pts = vec![[0.0, 0.0]];
    for i in 1..=n {
        let r = theta * i as f64 / n as f64;
        pts.extend((0..n).map(|j| {
            let a = TAU * j as f64 / n as f64;
            [r * a.cos(), r * a.sin()]
        }));
    }
    pts
}

/// `max / min` over `pts` of `sum_k w_k P(., omega_k)`.
pub fn mixture_ratio(atoms: &[(f64, f64)], pts: &[[f64; 2]]) -> Result<f64> {
    if let Some(x) = pts.iter().find(|x| !(x[0] * x[0] + x[1] * x[1] < 1.0)) {
        poisson_kernel_disc(*x, 0.0)?;
    }
    let dirs: Vec<(f64, f64, f64)> = atoms.iter().map(|&(w, om)| (w, om.cos(), om.sin())).collect();
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for x in pts {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let mut v = 0.0;
        for &(w, c, s) in &dirs {
            let (dx, dy) = (x[0] - c, x[1] - s);
            v += w * (1.0 - r2) / (dx * dx + dy * dy);
        }
        hi = hi.max(v);
        lo = lo.min(v);
    }
    Ok(hi / lo)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionFit {
    /// `a_0, a_1, ...` in powers of `d`.
    pub coeffs: Vec<f64>,
    /// Root mean square residual.
    pub residual: f64,
}

impl ExpansionFit {
    pub fn a(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HfunResult {
    pub model: ModelSpace,
    pub d: f64,
    pub value_closed: f64,
    pub value_numeric: f64,
    pub theta_used: f64,
    pub fit: Option<ExpansionFit>,
}

/// Maximizes the point-mass ratio over `n_boundary` angles and the disc
/// samples, with `theta` from quadrature of the model metric.
pub fn hfun_numeric(m: &ModelSpace, d: f64, n_boundary: usize, n_ball: usize) -> Result<HfunResult> {
    hfun_numeric_with(m, d, n_boundary, n_ball, Exec::default())
}

pub fn hfun_numeric_with(m: &ModelSpace, d: f64, n_boundary: usize, n_ball: usize, exec: Exec) -> Result<HfunResult> {
    let min = n_boundary.min(n_ball);
    if min < MIN_RESOLUTION {
        return Err(LabError::Resolution { got: min, min: MIN_RESOLUTION });
    }
    if n_ball % 2 == 1 {
        return Err(LabError::InvalidParam("n_ball must be even so the sample disc is symmetric".into()));
    }
    let value_closed = hfun_closed_form(m, d)?;
    let theta = theta_quadrature(m, d, n_ball);
    let pts = ball_samples(theta, n_ball);
    let ratios = exec.map(n_boundary, |i| mixture_ratio(&[(1.0, TAU * i as f64 / n_boundary as f64)], &pts));
    let mut value_numeric = f64::NEG_INFINITY;
    for r in ratios {
        value_numeric = value_numeric.max(r?);
    }
    Ok(HfunResult { model: *m, d, value_closed, value_numeric, theta_used: theta, fit: None })
}

/// Least squares fit of `sum_{i <= degree} a_i d^i` by QR on `d / max|d|`.
pub fn expansion_fit(d: &[f64], values: &[f64], degree: usize) -> Result<ExpansionFit> {
    if d.len() != values.len() {
        return Err(LabError::InvalidParam("sample and value counts differ".into()));
    }
    if d.len() < (degree + 3).max(6) {
        return Err(LabError::IllConditioned(format!("{} samples for degree {degree}", d.len())));
    }
    let scale = d.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if !(scale > 0.0) {
        return Err(LabError::IllConditioned("all samples at d = 0".into()));
    }
    let a = DMatrix::from_fn(d.len(), degree + 1, |i, j| (d[i] / scale).powi(j as i32));
    let b = DVector::from_column_slice(values);
    let qr = a.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..=degree).map(|i| r[(i, i)].abs()).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
    if lo <= 1e-10 * hi {
        return Err(LabError::IllConditioned(format!("R diagonal ratio {}", lo / hi)));
    }
    let qtb = qr.q().transpose() * &b;
    let c = r.solve_upper_triangular(&qtb).ok_or_else(|| LabError::IllConditioned("singular R".into()))?;
    let resid = &a * &c - &b;
    let coeffs = c.iter().enumerate().map(|(j, v)| v / scale.powi(j as i32)).collect();
    Ok(ExpansionFit { coeffs, residual: (resid.norm_squared() / d.len() as f64).sqrt() })
}

/// `n` radii spread symmetrically over `[-d_max, d_max]`, zero excluded, using
/// the even extension `H(-d) = H(d)`.
pub fn symmetric_samples(d_max: f64, n: usize) -> Vec<f64> {
    let half: Vec<f64> = (1..=n).map(|i| d_max * i as f64 / n as f64).collect();
    half.iter().rev().map(|d| -d).chain(half.iter().copied()).collect()
}

/// Closed-form values with the fit attached, over symmetric samples.
pub fn fit_closed_form(m: &ModelSpace, d_max: f64, n: usize, degree: usize) -> Result<ExpansionFit> {
    let ds = symmetric_samples(d_max, n);
    let vals = ds.iter().map(|d| hfun_closed_form(m, d.abs())).collect::<Result<Vec<_>>>()?;
    expansion_fit(&ds, &vals, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(poisson_kernel_disc([0.0, 0.0], 1.3).unwrap(), 1.0);
        assert!((poisson_kernel_disc([0.5, 0.0], 0.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((poisson_kernel_disc([-0.5, 0.0], 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(poisson_kernel_disc([1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let s = ModelSpace::sphere(1.0).unwrap();
        let h = ModelSpace::hyperbolic(1.0).unwrap();
        assert_eq!(hfun_closed_form(&ModelSpace::Euclidean, 3.0).unwrap(), 9.0);
        assert!((hfun_closed_form(&s, 1.0).unwrap() - 7.590_934_859_297_770).abs() < 1e-13);
        assert!((hfun_closed_form(&h, 1.0).unwrap() - 10.596_665_130_456_011).abs() < 1e-13);
        assert!((theta_ratio(&s, 1.0).unwrap() - 0.467_400_251_633_575).abs() < 1e-14);
        assert!(matches!(hfun_closed_form(&s, 2.5), Err(LabError::Chart(_))));
    }
}
