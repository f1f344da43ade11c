//! Scalar fields: closed-form evaluators and grid samples.

use super::{GeodesicBallGrid, ModelSpace, Point};
use crate::error::{LabError, Result};
use crate::rng::SeededRng;
use nalgebra::{Matrix3, Vector3};
use std::fmt::Debug;
use std::sync::Arc;

/// Value, Riemannian gradient (ambient tangent vector) and Hessian (ambient
/// bilinear form, meaningful on tangent vectors) at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vector3<f64>,
    pub hess: Matrix3<f64>,
}

impl Jet {
    fn scaled(self, c: f64) -> Jet {
        Jet { value: c * self.value, grad: c * self.grad, hess: c * self.hess }
    }

    fn add(self, o: Jet) -> Jet {
        Jet { value: self.value + o.value, grad: self.grad + o.grad, hess: self.hess + o.hess }
    }

    fn zero() -> Jet {
        Jet { value: 0.0, grad: Vector3::zeros(), hess: Matrix3::zeros() }
    }
}

pub trait Field: Send + Sync + Debug {
    fn value(&self, m: &ModelSpace, p: &Point) -> f64;

    /// Closed-form derivatives, if available at `p`.
    fn jet(&self, _m: &ModelSpace, _p: &Point) -> Option<Jet> {
        None
    }

    /// Weighted Laplacian from the closed form.
    fn laplacian_nu(&self, m: &ModelSpace, p: &Point) -> Result<f64> {
        let jet = self.jet(m, p).ok_or(LabError::MissingClosedForm)?;
        Ok(m.laplacian_from_jet(p, &jet))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Field for Constant {
    fn value(&self, _m: &ModelSpace, _p: &Point) -> f64 {
        self.0
    }
    fn jet(&self, _m: &ModelSpace, _p: &Point) -> Option<Jet> {
        Some(Jet { value: self.0, ..Jet::zero() })
    }
}

/// Radial profiles `f(rho)` with their first two derivatives.
#[derive(Debug, Clone)]
pub enum Profile {
    /// `b rho^2 / 2`
    Quadratic { b: f64 },
    /// `amp exp(-rho^2 / (2 width^2))`
    Bump { amp: f64, width: f64 },
    /// `depth (1 - exp(-rate rho^2))`
    Well { depth: f64, rate: f64 },
    /// `slope rho`; not differentiable at the center.
    Cone { slope: f64 },
    /// Any profile given as a closure-free lookup, e.g. the barrier.
    Custom(Arc<dyn RadialFn>),
}

pub trait RadialFn: Send + Sync + Debug {
    /// Returns `(f, f', f'')` at `rho >= 0`.
    fn eval(&self, rho: f64) -> (f64, f64, f64);
}

impl Profile {
    pub fn eval(&self, rho: f64) -> (f64, f64, f64) {
        match self {
            Profile::Quadratic { b } => (0.5 * b * rho * rho, b * rho, *b),
            Profile::Bump { amp, width } => {
                let s2 = width * width;
                let e = amp * (-rho * rho / (2.0 * s2)).exp();
                (e, -rho / s2 * e, (rho * rho / s2 - 1.0) / s2 * e)
            }
            Profile::Well { depth, rate } => {
                let e = (-rate * rho * rho).exp();
                (depth * (1.0 - e), 2.0 * depth * rate * rho * e, 2.0 * depth * rate * (1.0 - 2.0 * rate * rho * rho) * e)
            }
            Profile::Cone { slope } => (slope * rho, *slope, 0.0),
            Profile::Custom(f) => f.eval(rho),
        }
    }
}

/// `f(rho(center, .))`.
#[derive(Debug, Clone)]
pub struct Radial {
    pub center: Point,
    pub profile: Profile,
}

impl Radial {
    pub fn new(center: Point, profile: Profile) -> Self {
        Radial { center, profile }
    }
}

impl Field for Radial {
    fn value(&self, m: &ModelSpace, p: &Point) -> f64 {
        self.profile.eval(m.dist(&self.center, p)).0
    }

    fn jet(&self, m: &ModelSpace, p: &Point) -> Option<Jet> {
        let rho = m.dist(&self.center, p);
        let (f, df, d2f) = self.profile.eval(rho);
        let g = m.gram();
        if rho < 1e-9 {
            // smooth profiles have f'(rho) ~ f''(0) rho and keep the polar form
            let smooth = (df - d2f * rho).abs() <= 1e-6 * df.abs();
            if rho == 0.0 || df.abs() <= 1e-9 || !smooth {
                if df.abs() > 1e-9 {
                    return None;
                }
                return Some(Jet { value: f, grad: Vector3::zeros(), hess: d2f * g });
            }
        }
        let out = -m.log_unchecked(p, &self.center).v / rho;
        let gu = g * out;
        let radial = gu * gu.transpose();
        let hess = d2f * radial + df * m.log_deriv_metric(rho) * (g - radial);
        Some(Jet { value: f, grad: df * out, hess })
    }
}

/// Smooth functions of the embedding coordinates, restricted to the model.
#[derive(Debug, Clone, PartialEq)]
pub enum AmbientFn {
    /// `c + a . X`
    Linear { a: Vector3<f64>, c: f64 },
    /// `amp exp(a . X)`
    Exp { amp: f64, a: Vector3<f64> },
    /// `amp sin(a . X + phase)`
    Sin { amp: f64, a: Vector3<f64>, phase: f64 },
    /// `X^T q X / 2 + b . X + c`
    Quadratic { q: Matrix3<f64>, b: Vector3<f64>, c: f64 },
}

impl AmbientFn {
    /// Value, Euclidean gradient and Hessian in the embedding space.
    fn ambient(&self, x: &Vector3<f64>) -> (f64, Vector3<f64>, Matrix3<f64>) {
        match self {
            AmbientFn::Linear { a, c } => (c + a.dot(x), *a, Matrix3::zeros()),
            AmbientFn::Exp { amp, a } => {
                let e = amp * a.dot(x).exp();
                (e, e * a, e * a * a.transpose())
            }
            AmbientFn::Sin { amp, a, phase } => {
                let s = a.dot(x) + phase;
                (amp * s.sin(), amp * s.cos() * a, -amp * s.sin() * a * a.transpose())
            }
            AmbientFn::Quadratic { q, b, c } => (0.5 * x.dot(&(q * x)) + b.dot(x) + c, q * x + b, *q),
        }
    }
}

impl Field for AmbientFn {
    fn value(&self, _m: &ModelSpace, p: &Point) -> f64 {
        self.ambient(&p.0).0
    }

    fn jet(&self, m: &ModelSpace, p: &Point) -> Option<Jet> {
        let x = p.0;
        let (value, df, d2f) = self.ambient(&x);
        let (grad, hess) = match *m {
            ModelSpace::Sphere { k } => (m.project(p, &df), d2f - k * x.dot(&df) * Matrix3::identity()),
            ModelSpace::Hyperbolic { k } => {
                let g = m.gram();
                (m.project(p, &(g * df)), d2f + k * x.dot(&df) * g)
            }
            _ => (Vector3::new(df.x, df.y, 0.0), d2f),
        };
        Some(Jet { value, grad, hess })
    }
}

/// Finite linear combination of fields.
#[derive(Debug, Clone, Default)]
pub struct Sum {
    pub terms: Vec<(f64, Arc<dyn Field>)>,
}

impl Sum {
    pub fn new() -> Self {
        Sum::default()
    }

    pub fn with(mut self, c: f64, f: impl Field + 'static) -> Self {
        self.terms.push((c, Arc::new(f)));
        self
    }

    pub fn push(&mut self, c: f64, f: Arc<dyn Field>) {
        self.terms.push((c, f));
    }
}

impl Field for Sum {
    fn value(&self, m: &ModelSpace, p: &Point) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(m, p)).sum()
    }

    fn jet(&self, m: &ModelSpace, p: &Point) -> Option<Jet> {
        let mut acc = Jet::zero();
        for (c, f) in &self.terms {
            acc = acc.add(f.jet(m, p)?.scaled(*c));
        }
        Some(acc)
    }
}

impl Field for Arc<dyn Field> {
    fn value(&self, m: &ModelSpace, p: &Point) -> f64 {
        (**self).value(m, p)
    }
    fn jet(&self, m: &ModelSpace, p: &Point) -> Option<Jet> {
        (**self).jet(m, p)
    }
}

/// Random smooth field on the ball `B_r(center)` with Hessian of order
/// `scale`: a radial quadratic, three Gaussian bumps, and a sine of the
/// embedding coordinates.
pub fn random_smooth_field(m: &ModelSpace, center: &Point, r: f64, scale: f64, rng: &mut SeededRng) -> Sum {
    let frame = m.frame(center);
    let mut sum = Sum::new();
    sum.push(1.0, Arc::new(Radial::new(*center, Profile::Quadratic { b: scale * rng.range(-0.3, 0.6) })));
    for _ in 0..3 {
        let (dx, dy) = rng.in_disc(r);
        let c = m.polar_point(center, &frame, (dx * dx + dy * dy).sqrt(), dy.atan2(dx));
        let width = r * rng.range(0.35, 0.8);
        let amp = scale * width * width * rng.range(-0.35, 0.35);
        sum.push(1.0, Arc::new(Radial::new(c, Profile::Bump { amp, width })));
    }
    let dir = Vector3::new(rng.normal(), rng.normal(), if m.is_planar() { 0.0 } else { rng.normal() });
    let freq = rng.range(0.5, 1.5) / r;
    let a = dir.normalize() * freq;
    let amp = scale * 0.1 / (freq * freq);
    sum.push(1.0, Arc::new(AmbientFn::Sin { amp, a, phase: rng.range(0.0, std::f64::consts::TAU) }));
    sum
}

/// A function sampled on a polar grid, with optional closed form and
/// Dirichlet values on the bounding circle.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<GeodesicBallGrid>,
    pub values: Vec<f64>,
    pub boundary: Option<Vec<f64>>,
    pub closed_form: Option<Arc<dyn Field>>,
}

impl ScalarField {
    /// Samples a closed-form field at the nodes and on the boundary circle.
    pub fn sample(grid: Arc<GeodesicBallGrid>, field: Arc<dyn Field>) -> Self {
        let m = grid.model;
        let values = grid.nodes.iter().map(|p| field.value(&m, p)).collect();
        let boundary = grid.boundary_points().iter().map(|p| field.value(&m, p)).collect();
        ScalarField { grid, values, boundary: Some(boundary), closed_form: Some(field) }
    }

    pub fn from_values(grid: Arc<GeodesicBallGrid>, values: Vec<f64>, boundary: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidParam(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidParam("non-finite field value".into()));
        }
        Ok(ScalarField { grid, values, boundary, closed_form: None })
    }

    pub fn model(&self) -> ModelSpace {
        self.grid.model
    }

    /// Jet at node `idx` from the closed form.
    pub fn jet_at(&self, idx: usize) -> Option<Jet> {
        let f = self.closed_form.as_ref()?;
        f.jet(&self.grid.model, &self.grid.nodes[idx])
    }

    /// Weighted Laplacian at node `idx`: closed form when available,
    /// otherwise the polar five-point stencil.
    pub fn laplacian_nu_at(&self, idx: usize) -> Result<f64> {
        if let Some(f) = &self.closed_form {
            if let Some(jet) = f.jet(&self.grid.model, &self.grid.nodes[idx]) {
                return Ok(self.grid.model.laplacian_from_jet(&self.grid.nodes[idx], &jet));
            }
        }
        self.discrete_laplacian_at(idx)
    }

    /// Weighted Laplacian by the polar five-point stencil.
    pub fn discrete_laplacian_at(&self, idx: usize) -> Result<f64> {
        self.grid.stencil().apply_at(&self.values, self.boundary.as_deref(), idx)
    }
}

/// Weighted Laplacian at `p`: closed form if the field has one, otherwise
/// `p` must coincide with a grid node.
pub fn laplacian_nu(u: &ScalarField, p: &Point) -> Result<f64> {
    let m = u.grid.model;
    if let Some(f) = &u.closed_form {
        if let Some(jet) = f.jet(&m, p) {
            return Ok(m.laplacian_from_jet(p, &jet));
        }
    }
    let idx = u
        .grid
        .nodes
        .iter()
        .position(|q| (q.0 - p.0).norm() <= 1e-12)
        .ok_or_else(|| LabError::InvalidParam("point is not a grid node".into()))?;
    u.discrete_laplacian_at(idx)
}
