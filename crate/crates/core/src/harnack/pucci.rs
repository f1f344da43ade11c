//! Pucci extremal operators and the curvature error `E_theta`.

use crate::constants::{CurvatureParams, EffDim};
use crate::error::{LabError, Result};
use crate::model::ModelSpace;
use crate::report::CheckReport;
use crate::special::cal_h_unchecked;
use nalgebra::DMatrix;

pub const SYMMETRY_TOL: f64 = 1e-12;
const E_THETA_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PucciParams {
    pub theta: f64,
}

impl PucciParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(LabError::InvalidParam(format!("theta = {theta} must be >= 1")));
        }
        Ok(PucciParams { theta })
    }
}

/// Eigenvalues of the symmetric part, ascending. Rejects asymmetry above
/// `1e-12` relative to the largest entry.
pub fn sym_eigenvalues(h: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(LabError::InvalidParam("matrix is not square".into()));
    }
    let scale = h.amax().max(1.0);
    let asym = (h - h.transpose()).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(LabError::Asymmetric(asym));
    }
    let s = (h + h.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `(M^-_theta(H), M^+_theta(H))`.
pub fn pucci(h: &DMatrix<f64>, theta: f64) -> Result<(f64, f64)> {
    PucciParams::new(theta)?;
    let ev = sym_eigenvalues(h)?;
    let pos: f64 = ev.iter().filter(|&&l| l >= 0.0).sum();
    let neg: f64 = ev.iter().filter(|&&l| l < 0.0).sum();
    Ok((pos + theta * neg, neg + theta * pos))
}

/// `tr(A H)` for the eigenbasis-diagonal `A` with entries `1` or `theta`
/// that attains `M^-` (`maximize = false`) or `M^+`.
pub fn extremal_coefficients(h: &DMatrix<f64>, theta: f64, maximize: bool) -> Result<DMatrix<f64>> {
    sym_eigenvalues(h)?;
    let s = (h + h.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let diag = eig.eigenvalues.map(|l| if (l >= 0.0) == maximize { theta } else { 1.0 });
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&diag) * eig.eigenvectors.transpose())
}

/// `M^+_theta(H) - tr H` for the Hessian of `rho_y^2 / 2` at distance `rho`
/// in a two-dimensional model: radial eigenvalue 1 and one transverse
/// eigenvalue `rho psi'/psi`.
pub fn dist_sq_excess(m: &ModelSpace, rho: f64, theta: f64) -> f64 {
    let t = m.transverse_factor(rho);
    let pos = 1.0 + t.max(0.0);
    (theta - 1.0) * pos
}

/// `E_theta(r) = sup_{rho <= r} (M^+_theta - tr)[Hess(rho_y^2 / 2)]`, by
/// dense sampling of `rho` in `[0, r]` (the models are homogeneous in `y`).
pub fn e_theta(m: &ModelSpace, r: f64, theta: f64) -> Result<f64> {
    PucciParams::new(theta)?;
    if !(r >= 0.0) || r >= m.cut_radius() {
        return Err(LabError::CutRadius { norm: r, cut: m.cut_radius() });
    }
    Ok((0..=E_THETA_SAMPLES)
        .map(|i| dist_sq_excess(m, r * i as f64 / E_THETA_SAMPLES as f64, theta))
        .fold(0.0, f64::max))
}

/// Gaussian curvature of the metric; the weight plays no role here.
fn metric_curvature_floor(m: &ModelSpace) -> f64 {
    match *m {
        ModelSpace::Sphere { k } => k,
        ModelSpace::Hyperbolic { k } => -k,
        _ => 0.0,
    }
}

/// `E_theta(2R)` against the error-estimate bounds, in dimension `n = 2`.
///
/// Checked forms: `(theta-1)(1 + (n-1) H(2R sqrt(K/(n-1))))` with `K` the
/// Ricci floor, and `(theta-1)(1 + (n-1) H(2R sqrt(K_s)))` with `K_s` the
/// sectional floor. The displayed arguments `omega_{K,n} R` and
/// `sqrt(K_s/n) R` are kept in diagnostics.
pub fn e_theta_bounds(m: &ModelSpace, big_r: f64, theta: f64) -> Result<Vec<CheckReport>> {
    let n = 2.0;
    let e = e_theta(m, 2.0 * big_r, theta)?;
    let floor = metric_curvature_floor(m);
    let k_ric = (-floor * (n - 1.0)).max(0.0);
    let k_sec = (-floor).max(0.0);
    let anchor = "error estimate";
    let nonneg = match *m {
        ModelSpace::Sphere { k } => 2.0 * big_r * k.sqrt() < std::f64::consts::FRAC_PI_2,
        _ => true,
    };
    let ricci_bound = (theta - 1.0) * (1.0 + (n - 1.0) * cal_h_unchecked(2.0 * big_r * (k_ric / (n - 1.0)).sqrt()));
    let sec_bound = (theta - 1.0) * (1.0 + (n - 1.0) * cal_h_unchecked(2.0 * big_r * k_sec.sqrt()));
    let displayed_ricci = (theta - 1.0) * (1.0 + (n - 1.0) * cal_h_unchecked(2.0 * (k_ric / n).sqrt() * big_r));
    let displayed_sec = (theta - 1.0) * (1.0 + (n - 1.0) * cal_h_unchecked((k_sec / n).sqrt() * big_r));
    let ricci = if nonneg {
        CheckReport::inequality("pucci.e_theta_ricci", anchor, e, ricci_bound).tol(1e-12, 1e-15)
    } else {
        CheckReport::premise_failure("pucci.e_theta_ricci", anchor, "Hess(rho_y^2/2) >= 0 on the ball")
    };
    Ok(vec![
        ricci.diag_f64("displayed_bound", displayed_ricci).diag("displayed_bound_holds", e <= displayed_ricci * (1.0 + 1e-12)),
        CheckReport::inequality("pucci.e_theta_sectional", anchor, e, sec_bound)
            .tol(1e-12, 1e-15)
            .diag_f64("displayed_bound", displayed_sec)
            .diag("displayed_bound_holds", e <= displayed_sec * (1.0 + 1e-12)),
    ])
}

/// Contact-set control of the trace:
/// `tr S <= M^-_theta(S) + a (M^+_theta(H) - tr H)` when `S + a H >= 0`.
pub fn pucci_contact_bound(u_hessian: &DMatrix<f64>, dist_hessian: &DMatrix<f64>, a: f64, theta: f64) -> Result<CheckReport> {
    let name = "pucci.contact_bound";
    let anchor = "fully nonlinear";
    if !(a > 0.0) {
        return Err(LabError::InvalidParam(format!("a = {a} must be positive")));
    }
    let combined = u_hessian + dist_hessian * a;
    let lam_min = sym_eigenvalues(&combined)?[0];
    let scale = combined.amax().max(1.0);
    if lam_min < -1e-12 * scale {
        return Ok(CheckReport::premise_failure(name, anchor, "u_hessian + a dist_hessian >= 0").diag_f64("min_eigenvalue", lam_min));
    }
    let (m_minus, _) = pucci(u_hessian, theta)?;
    let (_, h_plus) = pucci(dist_hessian, theta)?;
    let lhs = u_hessian.trace();
    let rhs = m_minus + a * (h_plus - dist_hessian.trace());
    Ok(CheckReport::inequality(name, anchor, lhs, rhs).tol(0.0, 1e-10 * (scale + a * dist_hessian.amax())))
}

/// Curvature parameter with `sqrt(K) R` replaced by `sqrt(K) R + E_theta(2R)`.
/// The returned `K_eff` feeds `p0`, `C1`, `C2` and the growth constants; `eta`
/// stays with the original `K`.
pub fn effective_params(m: &ModelSpace, params: &CurvatureParams, theta: f64) -> Result<CurvatureParams> {
    let e = e_theta(m, 2.0 * params.r, theta)?;
    let root = params.k.sqrt() * params.r + e;
    let k_eff = (root / params.r).powi(2);
    match params.n {
        EffDim::Finite(_) => CurvatureParams::new(k_eff, params.n, params.r),
        EffDim::Infinite => Err(LabError::Unsupported("finite N required".into())),
    }
}
