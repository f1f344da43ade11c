//! The radial barrier `psi = h(rho / r)` and the Laplacian comparison for
//! distance functions.
//!
//! `h` is the cubic `b0 + b1 t^2 + b2 t^3` on `[0, 1/18]` joined `C^2` to the
//! tail `18^alpha - t^-alpha`.

use crate::constants::{alpha as alpha_of, omega, CurvatureParams, EffDim};
use crate::error::{LabError, Result};
use crate::model::field::{Field, RadialFn};
use crate::model::{ModelSpace, Point, Profile, Radial};
use crate::report::CheckReport;
use crate::special::cal_h_unchecked;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

pub const JUNCTION: f64 = 1.0 / 18.0;
const DIRECTIONS: usize = 8;
const RADIAL_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierSpec {
    pub alpha: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub junction: f64,
    pub center: Point,
    pub radius: f64,
    pub model: ModelSpace,
}

impl BarrierSpec {
    pub fn new(alpha: f64, model: ModelSpace, center: Point, radius: f64) -> Result<Self> {
        if !(alpha >= 2.0 && alpha.is_finite()) {
            return Err(LabError::InvalidParam(format!("alpha = {alpha} must be >= 2")));
        }
        if !(radius > 0.0) || radius >= model.domain_radius() {
            return Err(LabError::CutRadius { norm: radius, cut: model.domain_radius() });
        }
        model.check_point(&center)?;
        let p = 18f64.powf(alpha);
        Ok(BarrierSpec {
            alpha,
            beta0: -alpha * (5.0 + alpha) * p / 6.0,
            beta1: 18f64.powi(2) / 2.0 * alpha * (3.0 + alpha) * p,
            beta2: -(18f64.powi(3)) / 3.0 * alpha * (2.0 + alpha) * p,
            junction: JUNCTION,
            center,
            radius,
            model,
        })
    }

    /// Barrier with `alpha = N H(omega R)`.
    pub fn from_params(params: &CurvatureParams, model: ModelSpace, center: Point, radius: f64) -> Result<Self> {
        let n = params.n.finite()?;
        Self::new(alpha_of(params.k, n, params.r), model, center, radius)
    }

    fn tail_const(&self) -> f64 {
        18f64.powf(self.alpha)
    }

    /// `(h, h', h'')` of the cubic piece, at any `t`.
    pub fn cubic(&self, t: f64) -> [f64; 3] {
        [
            self.beta0 + self.beta1 * t * t + self.beta2 * t * t * t,
            2.0 * self.beta1 * t + 3.0 * self.beta2 * t * t,
            2.0 * self.beta1 + 6.0 * self.beta2 * t,
        ]
    }

    /// `(h, h', h'')` of the tail piece, at `t > 0`.
    pub fn tail(&self, t: f64) -> [f64; 3] {
        let a = self.alpha;
        let p = t.powf(-a);
        [self.tail_const() - p, a * p / t, -a * (a + 1.0) * p / (t * t)]
    }

    pub fn h_jet(&self, t: f64) -> [f64; 3] {
        if t <= self.junction {
            self.cubic(t)
        } else {
            self.tail(t)
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        self.h_jet(t)[0]
    }

    /// Relative mismatch of value, first and second derivative at the junction.
    pub fn junction_residuals(&self) -> [f64; 3] {
        let (c, t) = (self.cubic(self.junction), self.tail(self.junction));
        let scale = self.alpha * self.tail_const();
        [0, 1, 2].map(|k| (c[k] - t[k]).abs() / t[k].abs().max(scale))
    }

    /// `psi(p) = h(rho(x0, p) / r)`.
    pub fn psi(&self, p: &Point) -> Result<f64> {
        let rho = self.model.distance(&self.center, p)?;
        if rho >= self.model.cut_radius() {
            return Err(LabError::CutRadius { norm: rho, cut: self.model.cut_radius() });
        }
        Ok(self.h(rho / self.radius))
    }

    /// `psi` as a closed-form radial field.
    pub fn field(&self) -> Radial {
        Radial::new(self.center, Profile::Custom(Arc::new(BarrierProfile(*self))))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BarrierProfile(pub BarrierSpec);

impl RadialFn for BarrierProfile {
    fn eval(&self, rho: f64) -> (f64, f64, f64) {
        let r = self.0.radius;
        let [h, dh, d2h] = self.0.h_jet(rho / r);
        (h, dh / r, d2h / (r * r))
    }
}

/// Sample radii: `0`, then `n` points filling `(lo, hi]`.
fn radii(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

/// `max_theta r^2 Delta_nu psi / N + H(omega r)` on the circle of radius `rho`.
fn barrier_operator(spec: &BarrierSpec, f: &Radial, n: f64, h_wr: f64, rho: f64) -> Result<f64> {
    let m = spec.model;
    let frame = m.frame(&spec.center);
    let mut worst = f64::NEG_INFINITY;
    for d in 0..DIRECTIONS {
        let p = m.polar_point(&spec.center, &frame, rho, TAU * d as f64 / DIRECTIONS as f64);
        let lap = f.laplacian_nu(&m, &p)?;
        worst = worst.max(spec.radius * spec.radius * lap / n + h_wr);
    }
    Ok(worst)
}

/// Checks the barrier lemmas on dense radial samples:
/// junction matching, `inf h`, the derivative bounds, and the two
/// Laplacian bounds inside and outside `B_{r/18}`.
///
/// Inside `B_{r/18}` the bound checked is `972 a^2 18^a (1/N + H(wr)) + H(wr)`;
/// the deficit against `972 a^3 4^a` is recorded in the diagnostics.
pub fn verify_barrier(spec: &BarrierSpec, params: &CurvatureParams) -> Result<Vec<CheckReport>> {
    let n = params.n.finite()?;
    let a = spec.alpha;
    let m = spec.model;
    let r = spec.radius;
    let p18 = 18f64.powf(a);
    let mut out = Vec::new();

    let res = spec.junction_residuals();
    out.push(
        CheckReport::identity("barrier.junction_c2", "barrier 1", res.iter().cloned().fold(0.0, f64::max), 1e-8)
            .diag_f64("value", res[0])
            .diag_f64("first", res[1])
            .diag_f64("second", res[2]),
    );

    let ts: Vec<f64> = std::iter::once(0.0).chain(radii(0.0, 1.0, 20 * RADIAL_SAMPLES)).collect();
    let inf_h = ts.iter().map(|&t| spec.h(t)).fold(f64::INFINITY, f64::min);
    out.push(CheckReport::inequality("barrier.inf_h", "barrier 1", -a * a * p18, inf_h).diag_f64("inf_h", inf_h));

    let bound = 972.0 * a * a * p18;
    let (mut inner_dev, mut inner_ratio, mut inner_min_ratio) = (0.0f64, 0.0f64, f64::INFINITY);
    let (mut tail_identity, mut tail_min_ratio) = (0.0f64, f64::INFINITY);
    for &t in &ts[1..] {
        let [_, d1, d2] = spec.h_jet(t);
        let ratio = d1 / t;
        if t <= JUNCTION {
            inner_dev = inner_dev.max((d2 - ratio).abs());
            inner_ratio = inner_ratio.max(ratio);
            inner_min_ratio = inner_min_ratio.min(ratio);
        } else {
            let want = -a * (a + 2.0) * t.powf(-(a + 2.0));
            tail_identity = tail_identity.max((d2 - ratio - want).abs() / want.abs());
            tail_min_ratio = tail_min_ratio.min(ratio);
        }
    }
    out.push(
        CheckReport::inequality("barrier.inner_derivatives", "barrier 1", inner_dev.max(inner_ratio), bound)
            .diag_f64("max_abs_h2_minus_h1_over_t", inner_dev)
            .diag_f64("max_h1_over_t", inner_ratio)
            .diag_f64("min_h1_over_t", inner_min_ratio),
    );
    if !(inner_min_ratio > 0.0 && tail_min_ratio > 0.0) {
        if let Some(last) = out.last_mut() {
            last.pass = false;
        }
    }
    out.push(CheckReport::identity("barrier.tail_derivatives", "barrier 1", tail_identity, 1e-12).diag_f64("min_h1_over_t", tail_min_ratio));

    let ric = m.ricci_lower_bound(params.n, &spec.center, r)?;
    if ric < -params.k * (1.0 + 1e-12) - 1e-12 {
        out.push(CheckReport::premise_failure("barrier.laplacian_inner", "barrier 2", "Ric_{N,nu} >= -K g on B_r(x0)"));
        out.push(CheckReport::premise_failure("barrier.laplacian_outer", "barrier 2", "Ric_{N,nu} >= -K g on B_r(x0)"));
        return Ok(out);
    }
    let h_wr = cal_h_unchecked(omega(params.k, n) * r);
    let f = spec.field();
    let mut inner = f64::NEG_INFINITY;
    for rho in std::iter::once(0.0).chain(radii(0.0, r * JUNCTION, RADIAL_SAMPLES)) {
        inner = inner.max(barrier_operator(spec, &f, n, h_wr, rho)?);
    }
    let mut outer = f64::NEG_INFINITY;
    for rho in radii(r * JUNCTION, r, RADIAL_SAMPLES).filter(|&x| x < r) {
        outer = outer.max(barrier_operator(spec, &f, n, h_wr, rho)?);
    }
    let proof_bound = bound * (1.0 / n + h_wr) + h_wr;
    let statement_bound = 972.0 * a.powi(3) * 4f64.powf(a);
    out.push(
        CheckReport::inequality("barrier.laplacian_inner", "barrier 2", inner, proof_bound)
            .tol(1e-12, 0.0)
            .diag_f64("statement_bound", statement_bound)
            .diag_f64("statement_deficit", inner - statement_bound)
            .diag("form", "972 a^2 18^a (1/N + H(wr)) + H(wr)"),
    );
    out.push(
        CheckReport::inequality("barrier.laplacian_outer", "barrier 2", outer, 0.0)
            .tol(0.0, 1e-9 * a * p18)
            .diag_f64("H_omega_r", h_wr),
    );
    Ok(out)
}

/// Laplacian comparison for distance functions from `y` on radii in
/// `(0, sample_radius]`: `Delta_nu rho_y <= (N-1) H(w_{K,N-1} rho) / rho`
/// and `Delta_nu (rho_y^2 / 2) <= N H(w_{K,N} rho)`.
pub fn check_ricci_comparison(m: &ModelSpace, params: &CurvatureParams, y: &Point, sample_radius: f64) -> Result<Vec<CheckReport>> {
    let n = params.n.finite()?;
    if !(n > 1.0) {
        return Err(LabError::InvalidParam("N must exceed 1".into()));
    }
    if sample_radius >= m.domain_radius() {
        return Err(LabError::CutRadius { norm: sample_radius, cut: m.domain_radius() });
    }
    let anchor = "Ricci comparison";
    let ric = m.ricci_lower_bound(params.n, y, sample_radius)?;
    if ric < -params.k * (1.0 + 1e-12) - 1e-12 {
        return Ok(vec![
            CheckReport::premise_failure("barrier.ricci_comparison_rho", anchor, "Ric_{N,nu} >= -K g on the sample ball"),
            CheckReport::premise_failure("barrier.ricci_comparison_sq", anchor, "Ric_{N,nu} >= -K g on the sample ball"),
        ]);
    }
    let cone = Radial::new(*y, Profile::Cone { slope: 1.0 });
    let sq = Radial::new(*y, Profile::Quadratic { b: 1.0 });
    let frame = m.frame(y);
    let (w1, wn) = (omega(params.k, n - 1.0), omega(params.k, n));
    let (mut worst_rho, mut worst_sq) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for rho in radii(0.0, sample_radius, RADIAL_SAMPLES) {
        for d in 0..DIRECTIONS {
            let p = m.polar_point(y, &frame, rho, TAU * d as f64 / DIRECTIONS as f64);
            let l1 = cone.laplacian_nu(m, &p)?;
            let r1 = (n - 1.0) * cal_h_unchecked(w1 * rho) / rho;
            worst_rho = worst_rho.max((l1 - r1) * rho);
            let l2 = sq.laplacian_nu(m, &p)?;
            let r2 = n * cal_h_unchecked(wn * rho);
            worst_sq = worst_sq.max(l2 - r2);
        }
    }
    Ok(vec![
        CheckReport::inequality("barrier.ricci_comparison_rho", anchor, worst_rho, 0.0)
            .tol(0.0, 1e-12 * n)
            .diag("form", "rho (Delta_nu rho - (N-1) H(w rho) / rho)"),
        CheckReport::inequality("barrier.ricci_comparison_sq", anchor, worst_sq, 0.0).tol(0.0, 1e-12 * n),
    ])
}

/// Convenience: `K = max(0, -Ric lower bound)` for a model ball.
pub fn model_params(m: &ModelSpace, n: EffDim, center: &Point, radius: f64, big_r: f64) -> Result<CurvatureParams> {
    CurvatureParams::new(m.curvature_bound(n, center, radius)?, n, big_r)
}
