//! Dirichlet problem `Delta_nu u = f` on a polar grid ball.
//!
//! The five-point operator of [`PolarStencil`] is solved with BiCGSTAB,
//! right-preconditioned by the ring-averaged operator, which decouples into
//! one tridiagonal system per angular Fourier mode.

use crate::error::{LabError, Result};
use crate::model::field::Field;
use crate::model::grid::PolarStencil;
use crate::model::{GeodesicBallGrid, ScalarField};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::TAU;
use std::sync::Arc;

pub const SOLVER_MIN_RESOLUTION: usize = 64;
pub const MAX_ITERATIONS: usize = 500;
pub const REL_RESIDUAL: f64 = 1e-10;
pub const ABS_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    pub grid: Arc<GeodesicBallGrid>,
    /// Right-hand side at the nodes.
    pub f: Vec<f64>,
    /// Dirichlet data at the boundary angles.
    pub g: Vec<f64>,
}

impl DirichletProblem {
    pub fn new(grid: Arc<GeodesicBallGrid>, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let min = grid.n_r.min(grid.n_theta);
        if min < SOLVER_MIN_RESOLUTION {
            return Err(LabError::Resolution { got: min, min: SOLVER_MIN_RESOLUTION });
        }
        if f.len() != grid.len() || g.len() != grid.n_theta {
            return Err(LabError::InvalidParam("rhs or boundary data has the wrong length".into()));
        }
        if f.iter().chain(&g).any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParam("non-finite data".into()));
        }
        Ok(DirichletProblem { grid, f, g })
    }

    /// Samples `f` at the nodes and `g` on the bounding circle.
    pub fn from_fields(grid: Arc<GeodesicBallGrid>, f: &dyn Field, g: &dyn Field) -> Result<Self> {
        let m = grid.model;
        let fv = grid.nodes.iter().map(|p| f.value(&m, p)).collect();
        let gv = grid.boundary_points().iter().map(|p| g.value(&m, p)).collect();
        Self::new(grid, fv, gv)
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: ScalarField,
    pub iterations: usize,
    /// Final `max |A u - b|`.
    pub residual: f64,
    pub rhs_norm: f64,
}

struct FourierPreconditioner {
    nr: usize,
    nt: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Per mode: Thomas factors `(sub, inverse pivot, super')`.
    lower: Vec<Vec<f64>>,
    inv_pivot: Vec<Vec<f64>>,
    upper: Vec<Vec<f64>>,
}

impl FourierPreconditioner {
    fn new(s: &PolarStencil) -> Self {
        let (nr, nt) = (s.n_r, s.n_theta);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nt);
        let inv = planner.plan_fft_inverse(nt);
        let c_in0 = (0..nt).map(|j| s.c_in[j]).sum::<f64>() / nt as f64;
        let (mut lower, mut inv_pivot, mut upper) = (Vec::with_capacity(nt), Vec::with_capacity(nt), Vec::with_capacity(nt));
        for mode in 0..nt {
            let cosm = (TAU * mode as f64 / nt as f64).cos();
            let sign = if mode % 2 == 0 { 1.0 } else { -1.0 };
            let mut lo = vec![0.0; nr];
            let mut piv = vec![0.0; nr];
            let mut up = vec![0.0; nr];
            let mut prev_up = 0.0;
            for i in 0..nr {
                let w = s.radial[i];
                let b = s.drift_mean[i];
                let mut diag = w.second[2] + b * w.first[2] - 2.0 * s.ang[i] * (1.0 - cosm);
                if i == 0 {
                    diag += c_in0 * sign;
                } else {
                    lo[i] = w.second[1] + b * w.first[1];
                }
                let p = diag - lo[i] * prev_up;
                piv[i] = 1.0 / p;
                let u = if i + 1 < nr { w.second[0] + b * w.first[0] } else { 0.0 };
                up[i] = u * piv[i];
                prev_up = up[i];
            }
            lower.push(lo);
            inv_pivot.push(piv);
            upper.push(up);
        }
        FourierPreconditioner { nr, nt, fwd, inv, lower, inv_pivot, upper }
    }

    fn apply(&self, r: &[f64], out: &mut [f64], buf: &mut [Complex<f64>]) {
        let (nr, nt) = (self.nr, self.nt);
        for i in 0..nr {
            let row = &mut buf[i * nt..(i + 1) * nt];
            for j in 0..nt {
                row[j] = Complex::new(r[i * nt + j], 0.0);
            }
            self.fwd.process(row);
        }
        for mode in 0..nt {
            let (lo, piv, up) = (&self.lower[mode], &self.inv_pivot[mode], &self.upper[mode]);
            let mut prev = Complex::new(0.0, 0.0);
            for i in 0..nr {
                let v = (buf[i * nt + mode] - prev * lo[i]) * piv[i];
                buf[i * nt + mode] = v;
                prev = v;
            }
            for i in (0..nr.saturating_sub(1)).rev() {
                let next = buf[(i + 1) * nt + mode];
                buf[i * nt + mode] -= next * up[i];
            }
        }
        let scale = 1.0 / nt as f64;
        for i in 0..nr {
            let row = &mut buf[i * nt..(i + 1) * nt];
            self.inv.process(row);
            for j in 0..nt {
                out[i * nt + j] = row[j].re * scale;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Solves the Dirichlet problem to `max|r| <= 1e-10 max|b| + 1e-12`.
pub fn solve_poisson(prob: &DirichletProblem) -> Result<PoissonSolution> {
    let g = &prob.grid;
    let st = g.stencil();
    let n = g.len();
    let bt = st.boundary_term(&prob.g);
    let b: Vec<f64> = prob.f.iter().zip(&bt).map(|(f, t)| f - t).collect();
    let b_norm = max_abs(&b);
    let tol = REL_RESIDUAL * b_norm + ABS_RESIDUAL;
    let pre = FourierPreconditioner::new(st);
    let mut buf = vec![Complex::new(0.0, 0.0); n];

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut iterations = 0;
    if max_abs(&r) > tol {
        let mut r_hat = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut p_hat = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut s_hat = vec![0.0; n];
        let mut t = vec![0.0; n];
        loop {
            if iterations >= MAX_ITERATIONS {
                return Err(LabError::NotConverged { residual: max_abs(&r), iterations });
            }
            iterations += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || omega == 0.0 {
                r_hat.copy_from_slice(&r);
                rho = 1.0;
                alpha = 1.0;
                omega = 1.0;
                v.iter_mut().for_each(|e| *e = 0.0);
                p.iter_mut().for_each(|e| *e = 0.0);
                continue;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            pre.apply(&p, &mut p_hat, &mut buf);
            st.apply_homogeneous(&p_hat, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 {
                omega = 0.0;
                continue;
            }
            alpha = rho / rv;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if max_abs(&s) <= tol {
                for k in 0..n {
                    x[k] += alpha * p_hat[k];
                }
                r.copy_from_slice(&s);
                break;
            }
            pre.apply(&s, &mut s_hat, &mut buf);
            st.apply_homogeneous(&s_hat, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for k in 0..n {
                x[k] += alpha * p_hat[k] + omega * s_hat[k];
                r[k] = s[k] - omega * t[k];
            }
            if max_abs(&r) <= tol {
                break;
            }
        }
    }
    // true residual
    let mut ax = vec![0.0; n];
    st.apply_homogeneous(&x, &mut ax);
    let residual = ax.iter().zip(&b).fold(0.0f64, |m, (a, bb)| m.max((a - bb).abs()));
    if residual > 10.0 * tol {
        return Err(LabError::NotConverged { residual, iterations });
    }
    let u = ScalarField::from_values(g.clone(), x, Some(prob.g.clone()))?;
    Ok(PoissonSolution { u, iterations, residual, rhs_norm: b_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::Constant;
    use crate::model::ModelSpace;

    #[test]
    fn constants_are_harmonic() {
        let m = ModelSpace::gaussian(1.0).unwrap();
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 64).unwrap());
        let prob = DirichletProblem::from_fields(g, &Constant(0.0), &Constant(1.0)).unwrap();
        let sol = solve_poisson(&prob).unwrap();
        assert!(sol.u.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let m = ModelSpace::Euclidean;
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 32).unwrap());
        let err = DirichletProblem::from_fields(g, &Constant(0.0), &Constant(1.0)).unwrap_err();
        assert_eq!(err, LabError::Resolution { got: 32, min: 64 });
    }
}
