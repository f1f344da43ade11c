//! Cell-centered geodesic polar grids, quadrature and the five-point stencil.

use super::{ModelSpace, Point};
use crate::error::{LabError, Result};
use nalgebra::Vector3;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

pub const MIN_RESOLUTION: usize = 8;

/// Geodesic polar grid of `B_r(center)`. Node `(i, j)` sits at radius
/// `(i + 1/2) r / n_r` and angle `2 pi j / n_theta`, with index `i * n_theta + j`.
#[derive(Debug)]
pub struct GeodesicBallGrid {
    pub model: ModelSpace,
    pub center: Point,
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub frame: [Vector3<f64>; 2],
    pub d_rho: f64,
    pub d_theta: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    stencil: OnceLock<PolarStencil>,
}

impl GeodesicBallGrid {
    pub fn build(model: ModelSpace, center: Point, radius: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        model.validate()?;
        model.check_point(&center)?;
        for n in [n_r, n_theta] {
            if n < MIN_RESOLUTION {
                return Err(LabError::Resolution { got: n, min: MIN_RESOLUTION });
            }
        }
        if n_theta % 2 != 0 {
            return Err(LabError::InvalidParam(format!("n_theta = {n_theta} must be even")));
        }
        if !(radius > 0.0) || radius >= model.domain_radius() {
            return Err(LabError::CutRadius { norm: radius, cut: model.domain_radius() });
        }
        let frame = model.frame(&center);
        let d_rho = radius / n_r as f64;
        let d_theta = TAU / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_r * n_theta);
        let mut weights = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            let rho = (i as f64 + 0.5) * d_rho;
            let psi = model.metric_coeff(rho);
            for j in 0..n_theta {
                let p = model.polar_point(&center, &frame, rho, j as f64 * d_theta);
                weights.push(psi * (-model.potential(&p)).exp() * d_rho * d_theta);
                nodes.push(p);
            }
        }
        Ok(GeodesicBallGrid {
            model,
            center,
            radius,
            n_r,
            n_theta,
            frame,
            d_rho,
            d_theta,
            nodes,
            weights,
            stencil: OnceLock::new(),
        })
    }

    /// Grid with `n` rings and `n` angles.
    pub fn square(model: ModelSpace, center: Point, radius: f64, n: usize) -> Result<Self> {
        Self::build(model, center, radius, n, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    pub fn ring(&self, idx: usize) -> usize {
        idx / self.n_theta
    }

    pub fn angle_index(&self, idx: usize) -> usize {
        idx % self.n_theta
    }

    pub fn ring_radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.d_rho
    }

    pub fn node_radius(&self, idx: usize) -> f64 {
        self.ring_radius(self.ring(idx))
    }

    pub fn node_angle(&self, idx: usize) -> f64 {
        self.angle_index(idx) as f64 * self.d_theta
    }

    pub fn is_outer_ring(&self, idx: usize) -> bool {
        self.ring(idx) + 1 == self.n_r
    }

    /// Points on the bounding circle at the node angles.
    pub fn boundary_points(&self) -> Vec<Point> {
        (0..self.n_theta)
            .map(|j| self.model.polar_point(&self.center, &self.frame, self.radius, j as f64 * self.d_theta))
            .collect()
    }

    /// Polar coordinates of `p` about the center in the grid frame.
    pub fn polar_coords(&self, p: &Point) -> (f64, f64) {
        let v = self.model.log_unchecked(&self.center, p);
        let x = self.model.inner(&v.v, &self.frame[0]);
        let y = self.model.inner(&v.v, &self.frame[1]);
        let rho = self.model.dist(&self.center, p);
        (rho, y.atan2(x).rem_euclid(TAU))
    }

    /// Node whose cell contains `p`, or `None` outside the ball.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        let (rho, theta) = self.polar_coords(p);
        let i = (rho / self.d_rho).floor();
        if !(i >= 0.0) || i >= self.n_r as f64 {
            return None;
        }
        let j = (theta / self.d_theta).round() as usize % self.n_theta;
        Some(self.index(i as usize, j))
    }

    /// Nodes within distance `radius` of `p` (closed ball).
    pub fn nodes_within(&self, p: &Point, radius: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.model.dist(p, &self.nodes[i]) <= radius).collect()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn measure_of(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.weights[i]).sum()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn stencil(&self) -> &PolarStencil {
        self.stencil.get_or_init(|| PolarStencil::new(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallMeasure {
    pub value: f64,
    pub method: MeasureMethod,
}

/// Weighted volume of a geodesic ball. Closed form except for Gaussian-plane
/// balls away from the origin, which fall back to 512 x 256 quadrature.
pub fn ball_measure(m: &ModelSpace, center: &Point, r: f64) -> Result<BallMeasure> {
    if !(r >= 0.0) || r >= m.domain_radius() {
        return Err(LabError::CutRadius { norm: r, cut: m.domain_radius() });
    }
    let closed = |value| Ok(BallMeasure { value, method: MeasureMethod::ClosedForm });
    match *m {
        ModelSpace::Euclidean => closed(PI * r * r),
        ModelSpace::Sphere { k } => closed(TAU / k * (1.0 - (k.sqrt() * r).cos())),
        ModelSpace::Hyperbolic { k } => closed(TAU / k * ((k.sqrt() * r).cosh() - 1.0)),
        ModelSpace::GaussianPlane { lambda } => {
            if center.xy().norm() == 0.0 {
                if lambda == 0.0 {
                    closed(PI * r * r)
                } else {
                    closed(-TAU / lambda * (-0.5 * lambda * r * r).exp_m1())
                }
            } else {
                if r == 0.0 {
                    return Ok(BallMeasure { value: 0.0, method: MeasureMethod::Quadrature });
                }
                let g = GeodesicBallGrid::build(*m, *center, r, 512, 256)?;
                Ok(BallMeasure { value: g.total_measure(), method: MeasureMethod::Quadrature })
            }
        }
    }
}

/// Five-point discretization of
/// `u_rr + (psi'/psi - V_r) u_r + psi^-2 (u_tt - V_t u_t)` on the grid.
///
/// The inner neighbor of ring 0 is the ring-0 node opposite the pole, at
/// signed radius `-d_rho/2`. The outer neighbor of the last ring is the
/// boundary circle, half a step away.
#[derive(Debug, Clone)]
pub struct PolarStencil {
    pub n_r: usize,
    pub n_theta: usize,
    pub c_out: Vec<f64>,
    pub c_in: Vec<f64>,
    pub c_next: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c_center: Vec<f64>,
    /// Ring-averaged radial drift `psi'/psi - V_r`, used by preconditioners.
    pub drift_mean: Vec<f64>,
    /// `psi^-2 / d_theta^2` per ring.
    pub ang: Vec<f64>,
    /// Radial weights `(w_out, w_in, w_center)` per ring, before drift.
    pub radial: Vec<RadialWeights>,
}

#[derive(Debug, Clone, Copy)]
pub struct RadialWeights {
    pub second: [f64; 3],
    pub first: [f64; 3],
}

impl PolarStencil {
    fn new(g: &GeodesicBallGrid) -> Self {
        let (nr, nt) = (g.n_r, g.n_theta);
        let m = g.model;
        let h = g.d_rho;
        let mut s = PolarStencil {
            n_r: nr,
            n_theta: nt,
            c_out: vec![0.0; nr * nt],
            c_in: vec![0.0; nr * nt],
            c_next: vec![0.0; nr * nt],
            c_prev: vec![0.0; nr * nt],
            c_center: vec![0.0; nr * nt],
            drift_mean: vec![0.0; nr],
            ang: vec![0.0; nr],
            radial: Vec::with_capacity(nr),
        };
        for i in 0..nr {
            let rho = g.ring_radius(i);
            let hp = if i + 1 == nr { 0.5 * h } else { h };
            let hm = h;
            let sum = hp + hm;
            let second = [2.0 / (hp * sum), 2.0 / (hm * sum), -2.0 / (hp * hm)];
            let first = [hm / (hp * sum), -hp / (hm * sum), (hp - hm) / (hp * hm)];
            s.radial.push(RadialWeights { second, first });
            let psi = m.metric_coeff(rho);
            let a_theta = 1.0 / (psi * psi * g.d_theta * g.d_theta);
            s.ang[i] = a_theta;
            let mean_curv = m.log_deriv_metric(rho);
            let mut drift_sum = 0.0;
            for j in 0..nt {
                let idx = g.index(i, j);
                let (v_r, v_t) = potential_polar_derivs(g, idx);
                let b = mean_curv - v_r;
                drift_sum += b;
                s.c_out[idx] = second[0] + b * first[0];
                s.c_in[idx] = second[1] + b * first[1];
                let skew = v_t / (psi * psi * 2.0 * g.d_theta);
                s.c_next[idx] = a_theta - skew;
                s.c_prev[idx] = a_theta + skew;
                s.c_center[idx] = second[2] + b * first[2] - 2.0 * a_theta;
            }
            s.drift_mean[i] = drift_sum / nt as f64;
        }
        s
    }

    /// Index of the inner neighbor of node `(i, j)`.
    pub fn inner_index(&self, i: usize, j: usize) -> usize {
        if i == 0 {
            (j + self.n_theta / 2) % self.n_theta
        } else {
            (i - 1) * self.n_theta + j
        }
    }

    /// Applies the stencil at one node. The last ring needs boundary values.
    pub fn apply_at(&self, u: &[f64], boundary: Option<&[f64]>, idx: usize) -> Result<f64> {
        let nt = self.n_theta;
        let (i, j) = (idx / nt, idx % nt);
        let outer = if i + 1 == self.n_r {
            match boundary {
                Some(b) => b[j],
                None => return Err(LabError::BoundaryNode { i, j }),
            }
        } else {
            u[idx + nt]
        };
        let row = i * nt;
        Ok(self.c_center[idx] * u[idx]
            + self.c_out[idx] * outer
            + self.c_in[idx] * u[self.inner_index(i, j)]
            + self.c_next[idx] * u[row + (j + 1) % nt]
            + self.c_prev[idx] * u[row + (j + nt - 1) % nt])
    }

    /// Applies the stencil with zero boundary values (the homogeneous operator).
    pub fn apply_homogeneous(&self, u: &[f64], out: &mut [f64]) {
        let nt = self.n_theta;
        for i in 0..self.n_r {
            let row = i * nt;
            for j in 0..nt {
                let idx = row + j;
                let outer = if i + 1 == self.n_r { 0.0 } else { u[idx + nt] };
                out[idx] = self.c_center[idx] * u[idx]
                    + self.c_out[idx] * outer
                    + self.c_in[idx] * u[self.inner_index(i, j)]
                    + self.c_next[idx] * u[row + (j + 1) % nt]
                    + self.c_prev[idx] * u[row + (j + nt - 1) % nt];
            }
        }
    }

    /// Contribution of boundary values to the last ring.
    pub fn boundary_term(&self, boundary: &[f64]) -> Vec<f64> {
        let nt = self.n_theta;
        let mut out = vec![0.0; self.n_r * nt];
        let row = (self.n_r - 1) * nt;
        for j in 0..nt {
            out[row + j] = self.c_out[row + j] * boundary[j];
        }
        out
    }
}

/// `(dV/drho, dV/dtheta)` at a node in the grid's polar coordinates.
fn potential_polar_derivs(g: &GeodesicBallGrid, idx: usize) -> (f64, f64) {
    let lambda = g.model.lambda();
    if lambda == 0.0 {
        return (0.0, 0.0);
    }
    let rho = g.node_radius(idx);
    let t = g.node_angle(idx);
    let e_r = t.cos() * g.frame[0] + t.sin() * g.frame[1];
    let e_t = -t.sin() * g.frame[0] + t.cos() * g.frame[1];
    let x = g.nodes[idx].0;
    (lambda * x.dot(&e_r), lambda * rho * x.dot(&e_t))
}
