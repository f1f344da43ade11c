//! Jacobi matrices along geodesics `t -> exp_x(t v)` and the weighted
//! determinant functional `D_N`.
//!
//! On the 2-D constant-curvature models the frame `(v/|v|, n)` is parallel
//! along the geodesic, so `R(t) = k |v|^2 diag(0, 1)` is constant and the
//! Jacobi equation `J'' + R J = 0` is integrated in that frame.

use crate::constants::EffDim;
use crate::error::{LabError, Result};
use crate::model::{ModelSpace, Point, TangentVector};
use crate::report::CheckReport;
use crate::rng::SeededRng;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

pub const MIN_STEPS: usize = 64;
pub const DEFAULT_STEPS: usize = 256;

#[derive(Debug, Clone)]
pub struct JacobiState {
    pub model: ModelSpace,
    pub base: Point,
    pub direction: TangentVector,
    /// `(v/|v|, n)` at the base point.
    pub frame: [Vector3<f64>; 2],
    pub times: Vec<f64>,
    pub j: Vec<Matrix2<f64>>,
    pub jdot: Vec<Matrix2<f64>>,
    /// `exp(V(x) - V(gamma(t)))`.
    pub weight_ratio: Vec<f64>,
}

impl JacobiState {
    pub fn det(&self) -> Vec<f64> {
        self.j.iter().map(|j| j.determinant()).collect()
    }

    pub fn speed(&self) -> f64 {
        self.model.norm(&self.direction.v)
    }

    /// Largest entry of `J^T J' - J'^T J - W(0)` over the samples.
    pub fn wronskian_drift(&self) -> f64 {
        let w = |i: usize| self.j[i].transpose() * self.jdot[i] - self.jdot[i].transpose() * self.j[i];
        let w0 = w(0);
        (0..self.j.len()).map(|i| (w(i) - w0).amax()).fold(0.0, f64::max)
    }
}

/// Classical RK4 for `J'' = -R(t) J`, returning samples at `n + 1` times.
pub fn integrate_linear(
    r: &dyn Fn(f64) -> Matrix2<f64>,
    j0: Matrix2<f64>,
    jdot0: Matrix2<f64>,
    n_steps: usize,
) -> (Vec<f64>, Vec<Matrix2<f64>>, Vec<Matrix2<f64>>) {
    let h = 1.0 / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut js = Vec::with_capacity(n_steps + 1);
    let mut jds = Vec::with_capacity(n_steps + 1);
    let (mut j, mut jd) = (j0, jdot0);
    times.push(0.0);
    js.push(j);
    jds.push(jd);
    for s in 0..n_steps {
        let t = s as f64 * h;
        let (r0, rm, r1) = (r(t), r(t + 0.5 * h), r(t + h));
        let k1j = jd;
        let k1d = -r0 * j;
        let k2j = jd + 0.5 * h * k1d;
        let k2d = -rm * (j + 0.5 * h * k1j);
        let k3j = jd + 0.5 * h * k2d;
        let k3d = -rm * (j + 0.5 * h * k2j);
        let k4j = jd + h * k3d;
        let k4d = -r1 * (j + h * k3j);
        j += h / 6.0 * (k1j + 2.0 * k2j + 2.0 * k3j + k4j);
        jd += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        times.push((s + 1) as f64 * h);
        js.push(j);
        jds.push(jd);
    }
    (times, js, jds)
}

/// `R = k |v|^2 diag(0, 1)` in the frame `(v/|v|, n)`.
pub fn curvature_matrix(m: &ModelSpace, v: &TangentVector) -> Matrix2<f64> {
    let s2 = m.inner(&v.v, &v.v);
    Matrix2::new(0.0, 0.0, 0.0, m.curvature() * s2)
}

/// Orthonormal frame at `x` whose first vector is along `v` (any frame if `v = 0`).
pub fn aligned_frame(m: &ModelSpace, v: &TangentVector) -> [Vector3<f64>; 2] {
    let f = m.frame(&v.base);
    let c = Vector2::new(m.inner(&v.v, &f[0]), m.inner(&v.v, &f[1]));
    let n = c.norm();
    if n == 0.0 {
        return f;
    }
    let (c0, c1) = (c.x / n, c.y / n);
    [c0 * f[0] + c1 * f[1], -c1 * f[0] + c0 * f[1]]
}

/// Position and velocity of `t -> exp_x(t v)`.
pub fn geodesic(m: &ModelSpace, v: &TangentVector, t: f64) -> (Point, Vector3<f64>) {
    let x = v.base.0;
    let speed = m.norm(&v.v);
    match *m {
        ModelSpace::Sphere { k } if speed > 0.0 => {
            let (sk, u) = (k.sqrt(), v.v / speed);
            let a = sk * speed * t;
            (Point(a.cos() * x + a.sin() / sk * u), speed * (-a.sin() * sk * x + a.cos() * u))
        }
        ModelSpace::Hyperbolic { k } if speed > 0.0 => {
            let (sk, u) = (k.sqrt(), v.v / speed);
            let a = sk * speed * t;
            (Point(a.cosh() * x + a.sinh() / sk * u), speed * (a.sinh() * sk * x + a.cosh() * u))
        }
        _ => (Point(x + t * v.v), v.v),
    }
}

/// Integrates the Jacobi equation along `exp_x(t v)` with `J(0) = I` and
/// `J'(0)` the given Hessian (an ambient bilinear form on `T_x`).
pub fn integrate_jacobi(
    m: &ModelSpace,
    initial_hessian: &Matrix3<f64>,
    v: &TangentVector,
    n_steps: usize,
) -> Result<JacobiState> {
    let frame = aligned_frame(m, v);
    let h = Matrix2::new(
        frame[0].dot(&(initial_hessian * frame[0])),
        frame[0].dot(&(initial_hessian * frame[1])),
        frame[1].dot(&(initial_hessian * frame[0])),
        frame[1].dot(&(initial_hessian * frame[1])),
    );
    integrate_jacobi_frame(m, &h, v, n_steps)
}

/// As [`integrate_jacobi`] with `J'(0)` given in the frame `(v/|v|, n)`.
pub fn integrate_jacobi_frame(m: &ModelSpace, jdot0: &Matrix2<f64>, v: &TangentVector, n_steps: usize) -> Result<JacobiState> {
    if n_steps < MIN_STEPS {
        return Err(LabError::Resolution { got: n_steps, min: MIN_STEPS });
    }
    m.check_point(&v.base)?;
    let speed = m.norm(&v.v);
    if speed >= m.cut_radius() {
        return Err(LabError::CutRadius { norm: speed, cut: m.cut_radius() });
    }
    let r = curvature_matrix(m, v);
    let (times, j, jdot) = integrate_linear(&|_| r, Matrix2::identity(), *jdot0, n_steps);
    let v0 = m.potential(&v.base);
    let weight_ratio = times.iter().map(|&t| (v0 - m.potential(&geodesic(m, v, t).0)).exp()).collect();
    Ok(JacobiState { model: *m, base: v.base, direction: *v, frame: aligned_frame(m, v), times, j, jdot, weight_ratio })
}

/// `D_N(t) = (w det J)^{1/N}`, or `ln(w det J)` for `N = inf`.
pub fn dn_functional(state: &JacobiState, n: EffDim) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(state.times.len());
    for (i, jm) in state.j.iter().enumerate() {
        let d = state.weight_ratio[i] * jm.determinant();
        if !(d > 0.0) {
            return Err(LabError::NonPositiveDeterminant { t: state.times[i] });
        }
        out.push(match n {
            EffDim::Finite(nn) => d.powf(1.0 / nn),
            EffDim::Infinite => d.ln(),
        });
    }
    Ok(out)
}

fn second_differences(d: &[f64], stride: usize, h: f64) -> Vec<(usize, f64)> {
    let hh = h * stride as f64;
    (stride..d.len() - stride)
        .step_by(stride)
        .map(|i| (i, (d[i + stride] - 2.0 * d[i] + d[i - stride]) / (hh * hh)))
        .collect()
}

/// Second-difference check of `D_N'' <= -(1/N) Ric_{N,nu}(g') D_N`
/// (`D_inf'' <= -Ric_{inf,nu}(g')`) and of the uniform form
/// `D_N'' <= (K/N) |g'|^2 D_N`.
pub fn verify_comparison(state: &JacobiState, n: EffDim, ledger_k: f64) -> Result<Vec<CheckReport>> {
    let m = state.model;
    let d = dn_functional(state, n)?;
    let h = state.times[1] - state.times[0];
    let s2 = state.speed().powi(2);
    let scale = d.iter().fold(1.0f64, |a, x| a.max(x.abs())) * s2.max(1.0);
    let fine = second_differences(&d, 1, h);
    let coarse = second_differences(&d, 2, h);
    let mut noise = 0.0f64;
    for &(i, c) in &coarse {
        if let Some(&(_, f)) = fine.iter().find(|(j, _)| *j == i) {
            noise = noise.max((f - c).abs());
        }
    }
    if noise > 1e-2 * scale {
        return Err(LabError::SamplingTooCoarse(noise / scale));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_k = f64::NEG_INFINITY;
    for &(i, dd) in &fine {
        let (p, vel) = geodesic(&m, &state.direction, state.times[i]);
        let ric = m.bakry_emery_ricci(n, &TangentVector { base: p, v: vel })?;
        let (rhs, rhs_k) = match n {
            EffDim::Finite(nn) => (-ric / nn * d[i], ledger_k / nn * s2 * d[i]),
            EffDim::Infinite => (-ric, ledger_k * s2),
        };
        worst = worst.max(dd - rhs);
        worst_k = worst_k.max(dd - rhs_k);
    }
    let tol = 1e-5 * scale;
    Ok(vec![
        CheckReport::inequality("jacobi.dn_comparison", "det estimate2", worst, 0.0)
            .tol(0.0, tol)
            .diag_f64("noise", noise)
            .diag("samples", fine.len()),
        CheckReport::inequality("jacobi.dn_uniform", "Ricci ode", worst_k, 0.0)
            .tol(0.0, tol)
            .diag_f64("K", ledger_k),
    ])
}

/// Checks on the Jacobi ODE for a symmetric curvature path `R(t)`:
/// `S(t) = [J01]^{-1} J10` is symmetric and decreasing, and for random
/// symmetric `J'(0)`, `J'(0) + S(1) >= 0` iff `det J > 0` on `[0, 1)`.
pub fn verify_ode_structure(
    r: &dyn Fn(f64) -> Matrix2<f64>,
    n_steps: usize,
    n_random: usize,
    rng: &mut SeededRng,
) -> Result<Vec<CheckReport>> {
    if n_steps < MIN_STEPS {
        return Err(LabError::Resolution { got: n_steps, min: MIN_STEPS });
    }
    for i in 0..=n_steps {
        let ri = r(i as f64 / n_steps as f64);
        let asym = (ri - ri.transpose()).amax();
        if asym > 1e-12 * ri.amax().max(1.0) {
            return Err(LabError::Asymmetric(asym));
        }
    }
    let (times, j10, _) = integrate_linear(r, Matrix2::identity(), Matrix2::zeros(), n_steps);
    let (_, j01, _) = integrate_linear(r, Matrix2::zeros(), Matrix2::identity(), n_steps);
    let mut s = Vec::with_capacity(n_steps);
    for i in 1..=n_steps {
        let inv = j01[i].try_inverse().ok_or(LabError::Singular { t: times[i] })?;
        if j01[i].determinant().abs() < 1e-14 {
            return Err(LabError::Singular { t: times[i] });
        }
        s.push(inv * j10[i]);
    }
    let asym = s.iter().map(|m| (m - m.transpose()).amax() / m.amax().max(1.0)).fold(0.0, f64::max);
    let mut increase = f64::NEG_INFINITY;
    for w in s.windows(2) {
        let d = w[1] - w[0];
        let sym = 0.5 * (d + d.transpose());
        let scale = w[0].amax().max(1.0);
        increase = increase.max(sym.symmetric_eigenvalues().max() / scale);
    }
    let s1 = 0.5 * (s[n_steps - 1] + s[n_steps - 1].transpose());

    let mut tested = 0usize;
    let mut skipped = 0usize;
    let mut mismatches = 0usize;
    for _ in 0..n_random {
        let hm = rng.symmetric2(2.0);
        let lam = (hm + s1).symmetric_eigenvalues().min();
        if lam.abs() < 1e-2 {
            skipped += 1;
            continue;
        }
        let (_, js, _) = integrate_linear(r, Matrix2::identity(), hm, n_steps);
        let positive = js[..n_steps].iter().all(|j| j.determinant() > 0.0);
        tested += 1;
        if positive != (lam > 0.0) {
            mismatches += 1;
        }
    }
    Ok(vec![
        CheckReport::identity("jacobi.s_symmetric", "positivity of S(t)", asym, 1e-8),
        CheckReport::inequality("jacobi.s_decreasing", "positivity of S(t)", increase, 0.0).tol(0.0, 1e-10),
        CheckReport::inequality("jacobi.good_initial_condition", "good initial condition", mismatches as f64, 0.0)
            .diag("tested", tested)
            .diag("skipped_ambiguous", skipped),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(m: &ModelSpace, c: Vector2<f64>) -> TangentVector {
        m.from_frame(&m.origin(), c)
    }

    #[test]
    fn flat_identity_and_quadratic() {
        let m = ModelSpace::Euclidean;
        let v = tv(&m, Vector2::new(0.3, -0.2));
        let st = integrate_jacobi(&m, &Matrix3::zeros(), &v, 64).unwrap();
        assert!(st.det().iter().all(|d| (d - 1.0).abs() < 1e-14));
        assert!(dn_functional(&st, EffDim::Infinite).unwrap().iter().all(|d| d.abs() < 1e-14));
        let st = integrate_jacobi(&m, &Matrix3::identity(), &v, 64).unwrap();
        for (t, d) in st.times.iter().zip(st.det()) {
            assert!((d - (1.0 + t) * (1.0 + t)).abs() < 1e-12);
        }
        let d2 = dn_functional(&st, EffDim::Finite(2.0)).unwrap();
        assert!(st.times.iter().zip(d2).all(|(t, d)| (d - 1.0 - t).abs() < 1e-12));
    }

    #[test]
    fn sphere_transverse_cosine() {
        let m = ModelSpace::sphere(1.0).unwrap();
        let s = 1.2;
        let v = tv(&m, Vector2::new(s, 0.0));
        let st = integrate_jacobi(&m, &Matrix3::zeros(), &v, 256).unwrap();
        for (t, d) in st.times.iter().zip(st.det()) {
            assert!((d - (s * t).cos()).abs() < 1e-8);
        }
        assert!(st.wronskian_drift() < 1e-9);
    }

    #[test]
    fn curvature_matrices() {
        let h = ModelSpace::hyperbolic(1.0).unwrap();
        let v = tv(&h, Vector2::new(0.0, 1.0));
        assert_eq!(curvature_matrix(&h, &v), Matrix2::new(0.0, 0.0, 0.0, -1.0));
        assert_eq!(curvature_matrix(&ModelSpace::Euclidean, &tv(&ModelSpace::Euclidean, Vector2::new(1.0, 0.0))), Matrix2::zeros());
    }

    #[test]
    fn too_few_steps() {
        let m = ModelSpace::Euclidean;
        let v = tv(&m, Vector2::new(1.0, 0.0));
        assert!(matches!(integrate_jacobi(&m, &Matrix3::zeros(), &v, 10), Err(LabError::Resolution { .. })));
    }
}
