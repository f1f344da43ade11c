//! The four closed-form model spaces and their geometry.
//!
//! Points live in embedding coordinates: the plane as `(x, y, 0)`, the sphere
//! of curvature `k` as vectors of Euclidean norm `1/sqrt(k)`, and the
//! hyperbolic plane as the upper sheet of `<p, p> = -1/k` for the Minkowski
//! form `-x0*y0 + x1*y1 + x2*y2`.

pub mod field;
pub mod grid;

pub use field::{AmbientFn, Field, Jet, Profile, Radial, ScalarField};
pub use grid::{BallMeasure, GeodesicBallGrid, MeasureMethod, PolarStencil};

use crate::constants::EffDim;
use crate::error::{LabError, Result};
use crate::special::{sinc, x_cot_x};
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const EMBED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpace {
    Euclidean,
    Sphere { k: f64 },
    Hyperbolic { k: f64 },
    #[serde(alias = "gaussian")]
    GaussianPlane { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vector3<f64>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub v: Vector3<f64>,
}

impl Point {
    pub fn planar(x: f64, y: f64) -> Point {
        Point(Vector3::new(x, y, 0.0))
    }

    pub fn xy(&self) -> Vector2<f64> {
        Vector2::new(self.0.x, self.0.y)
    }
}

impl ModelSpace {
    pub fn sphere(k: f64) -> Result<Self> {
        positive("k", k)?;
        Ok(ModelSpace::Sphere { k })
    }

    pub fn hyperbolic(k: f64) -> Result<Self> {
        positive("k", k)?;
        Ok(ModelSpace::Hyperbolic { k })
    }

    pub fn gaussian(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(LabError::InvalidParam(format!("lambda = {lambda}")));
        }
        Ok(ModelSpace::GaussianPlane { lambda })
    }

    /// Re-checks parameters of a value built directly (e.g. deserialized).
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpace::Sphere { k } | ModelSpace::Hyperbolic { k } => positive("k", k),
            ModelSpace::GaussianPlane { lambda } if !lambda.is_finite() => {
                Err(LabError::InvalidParam(format!("lambda = {lambda}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpace::Euclidean => "euclidean",
            ModelSpace::Sphere { .. } => "sphere",
            ModelSpace::Hyperbolic { .. } => "hyperbolic",
            ModelSpace::GaussianPlane { .. } => "gaussian_plane",
        }
    }

    pub fn dim(&self) -> usize {
        2
    }

    /// Sectional (Gauss) curvature.
    pub fn curvature(&self) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => k,
            ModelSpace::Hyperbolic { k } => -k,
            _ => 0.0,
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            ModelSpace::GaussianPlane { lambda } => lambda,
            _ => 0.0,
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, ModelSpace::Euclidean | ModelSpace::GaussianPlane { .. })
    }

    /// Injectivity radius of exp: `pi/sqrt(k)` on the sphere.
    pub fn cut_radius(&self) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => PI / k.sqrt(),
            _ => f64::INFINITY,
        }
    }

    /// Largest admissible radius of a working ball: `pi/(2 sqrt(k))` on the sphere.
    pub fn domain_radius(&self) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => PI / (2.0 * k.sqrt()),
            _ => f64::INFINITY,
        }
    }

    /// Base point: the plane origin, the north pole, or the hyperboloid vertex.
    pub fn origin(&self) -> Point {
        match *self {
            ModelSpace::Sphere { k } => Point(Vector3::new(0.0, 0.0, 1.0 / k.sqrt())),
            ModelSpace::Hyperbolic { k } => Point(Vector3::new(1.0 / k.sqrt(), 0.0, 0.0)),
            _ => Point(Vector3::zeros()),
        }
    }

    /// Ambient bilinear form inducing the metric on tangent vectors.
    pub fn gram(&self) -> Matrix3<f64> {
        match self {
            ModelSpace::Hyperbolic { .. } => Matrix3::from_diagonal(&Vector3::new(-1.0, 1.0, 1.0)),
            _ => Matrix3::identity(),
        }
    }

    pub fn inner(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        match self {
            ModelSpace::Hyperbolic { .. } => -a.x * b.x + a.y * b.y + a.z * b.z,
            _ => a.dot(b),
        }
    }

    pub fn norm(&self, v: &Vector3<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        let x = &p.0;
        let ok = match *self {
            ModelSpace::Sphere { k } => (k * x.norm_squared() - 1.0).abs() <= EMBED_TOL * 10.0,
            ModelSpace::Hyperbolic { k } => {
                (k * self.inner(x, x) + 1.0).abs() <= EMBED_TOL * 10.0 * (1.0 + k * x.norm_squared()) && x.x > 0.0
            }
            _ => x.z == 0.0,
        };
        if ok && x.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(LabError::InvalidPoint(format!("{:?} on {}", x.as_slice(), self.name())))
        }
    }

    /// Projects an ambient vector onto the tangent plane at `p`.
    pub fn project(&self, p: &Point, w: &Vector3<f64>) -> Vector3<f64> {
        match *self {
            ModelSpace::Sphere { k } => w - k * p.0.dot(w) * p.0,
            ModelSpace::Hyperbolic { k } => w + k * self.inner(w, &p.0) * p.0,
            _ => Vector3::new(w.x, w.y, 0.0),
        }
    }

    /// Orthonormal tangent frame at `p`, deterministic and smooth away from
    /// a single antipodal configuration on the sphere.
    pub fn frame(&self, p: &Point) -> [Vector3<f64>; 2] {
        match *self {
            ModelSpace::Sphere { k } => {
                let n = p.0 * k.sqrt();
                let a = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                let e1 = (a - a.dot(&n) * n).normalize();
                let e2 = n.cross(&e1);
                [e1, e2]
            }
            ModelSpace::Hyperbolic { .. } => {
                let a = self.project(p, &Vector3::y());
                let e1 = a / self.norm(&a);
                let b = self.project(p, &Vector3::z());
                let b = b - self.inner(&b, &e1) * e1;
                let e2 = b / self.norm(&b);
                [e1, e2]
            }
            _ => [Vector3::x(), Vector3::y()],
        }
    }

    /// Tangent vector at `p` from frame components.
    pub fn from_frame(&self, p: &Point, c: Vector2<f64>) -> TangentVector {
        let [e1, e2] = self.frame(p);
        TangentVector { base: *p, v: c.x * e1 + c.y * e2 }
    }

    /// Frame components of a tangent vector.
    pub fn to_frame(&self, v: &TangentVector) -> Vector2<f64> {
        let [e1, e2] = self.frame(&v.base);
        Vector2::new(self.inner(&v.v, &e1), self.inner(&v.v, &e2))
    }

    /// Restricts an ambient bilinear form to the tangent frame at `p`.
    pub fn form_in_frame(&self, p: &Point, b: &Matrix3<f64>) -> Matrix2<f64> {
        let [e1, e2] = self.frame(p);
        let b11 = e1.dot(&(b * e1));
        let b12 = 0.5 * (e1.dot(&(b * e2)) + e2.dot(&(b * e1)));
        let b22 = e2.dot(&(b * e2));
        Matrix2::new(b11, b12, b12, b22)
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match *self {
            ModelSpace::Sphere { k } => {
                let s = k.sqrt();
                let (np, nq) = (p.0 * s, q.0 * s);
                let angle = np.cross(&nq).norm().atan2(np.dot(&nq));
                if angle > PI - 1e-9 {
                    return Err(LabError::Antipodal);
                }
                Ok(angle / s)
            }
            ModelSpace::Hyperbolic { k } => Ok(self.hyperbolic_distance(k, p, q)),
            _ => Ok((p.0 - q.0).norm()),
        }
    }

    /// Distance without the antipodal guard; callers stay inside the domain radius.
    pub fn dist(&self, p: &Point, q: &Point) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => {
                let s = k.sqrt();
                let (np, nq) = (p.0 * s, q.0 * s);
                np.cross(&nq).norm().atan2(np.dot(&nq)) / s
            }
            ModelSpace::Hyperbolic { k } => self.hyperbolic_distance(k, p, q),
            _ => (p.0 - q.0).norm(),
        }
    }

    fn hyperbolic_distance(&self, k: f64, p: &Point, q: &Point) -> f64 {
        let w = p.0 - q.0;
        let chord = self.inner(&w, &w).max(0.0).sqrt();
        2.0 / k.sqrt() * (0.5 * k.sqrt() * chord).asinh()
    }

    pub fn exp_map(&self, v: &TangentVector) -> Result<Point> {
        let len = self.norm(&v.v);
        if len >= self.cut_radius() {
            return Err(LabError::CutRadius { norm: len, cut: self.cut_radius() });
        }
        Ok(self.exp_unchecked(v))
    }

    pub(crate) fn exp_unchecked(&self, v: &TangentVector) -> Point {
        let p = v.base.0;
        match *self {
            ModelSpace::Sphere { k } => {
                let s = k.sqrt();
                let t = s * v.v.norm();
                Point(t.cos() * p + sinc(t) * v.v)
            }
            ModelSpace::Hyperbolic { k } => {
                let s = k.sqrt();
                let t = s * self.norm(&v.v);
                let shc = if t < 1e-4 { 1.0 + t * t / 6.0 } else { t.sinh() / t };
                Point(t.cosh() * p + shc * v.v)
            }
            _ => Point(Vector3::new(p.x + v.v.x, p.y + v.v.y, 0.0)),
        }
    }

    pub fn log_map(&self, p: &Point, q: &Point) -> Result<TangentVector> {
        let d = self.distance(p, q)?;
        if d >= self.cut_radius() {
            return Err(LabError::CutRadius { norm: d, cut: self.cut_radius() });
        }
        Ok(self.log_with_distance(p, q, d))
    }

    pub(crate) fn log_unchecked(&self, p: &Point, q: &Point) -> TangentVector {
        let d = self.dist(p, q);
        self.log_with_distance(p, q, d)
    }

    fn log_with_distance(&self, p: &Point, q: &Point, d: f64) -> TangentVector {
        let w = match self {
            ModelSpace::Sphere { .. } | ModelSpace::Hyperbolic { .. } => self.project(p, &q.0),
            _ => q.0 - p.0,
        };
        let n = self.norm(&w);
        let v = if n == 0.0 || d == 0.0 { Vector3::zeros() } else { w * (d / n) };
        TangentVector { base: *p, v }
    }

    /// Point at polar coordinates `(rho, theta)` about `center` in its frame.
    pub fn polar_point(&self, center: &Point, frame: &[Vector3<f64>; 2], rho: f64, theta: f64) -> Point {
        let v = rho * (theta.cos() * frame[0] + theta.sin() * frame[1]);
        self.exp_unchecked(&TangentVector { base: *center, v })
    }

    /// Weight potential `V`.
    pub fn potential(&self, p: &Point) -> f64 {
        match *self {
            ModelSpace::GaussianPlane { lambda } => 0.5 * lambda * (p.0.x * p.0.x + p.0.y * p.0.y),
            _ => 0.0,
        }
    }

    /// Riemannian gradient of `V` (zero off the Gaussian plane).
    pub fn grad_potential(&self, p: &Point) -> Vector3<f64> {
        match *self {
            ModelSpace::GaussianPlane { lambda } => Vector3::new(lambda * p.0.x, lambda * p.0.y, 0.0),
            _ => Vector3::zeros(),
        }
    }

    /// Polar metric coefficient: `rho`, `sin(sqrt(k) rho)/sqrt(k)` or `sinh(sqrt(k) rho)/sqrt(k)`.
    pub fn metric_coeff(&self, rho: f64) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => (k.sqrt() * rho).sin() / k.sqrt(),
            ModelSpace::Hyperbolic { k } => (k.sqrt() * rho).sinh() / k.sqrt(),
            _ => rho,
        }
    }

    /// `rho * psi'(rho) / psi(rho)`: the transverse eigenvalue of Hess(rho^2/2).
    pub fn transverse_factor(&self, rho: f64) -> f64 {
        match *self {
            ModelSpace::Sphere { k } => x_cot_x(k.sqrt() * rho),
            ModelSpace::Hyperbolic { k } => crate::special::cal_h_unchecked(k.sqrt() * rho),
            _ => 1.0,
        }
    }

    /// `psi'(rho)/psi(rho)`, the mean curvature of the distance sphere.
    pub fn log_deriv_metric(&self, rho: f64) -> f64 {
        self.transverse_factor(rho) / rho
    }

    /// Hessian of `rho_y^2 / 2` at `x`, in the frame at `x`.
    pub fn dist_sq_hessian(&self, y: &Point, x: &Point) -> Matrix2<f64> {
        let jet = Radial::new(*y, Profile::Quadratic { b: 1.0 }).jet(self, x).expect("smooth profile");
        self.form_in_frame(x, &jet.hess)
    }

    /// Weighted Laplacian from a jet: trace of the Hessian minus `g(grad u, grad V)`.
    pub fn laplacian_from_jet(&self, p: &Point, jet: &Jet) -> f64 {
        let h = self.form_in_frame(p, &jet.hess);
        h.trace() - self.inner(&jet.grad, &self.grad_potential(p))
    }

    /// Bakry-Emery Ricci tensor `Ric_{N,nu}(w, w)` for a tangent vector `w`.
    pub fn bakry_emery_ricci(&self, n: EffDim, w: &TangentVector) -> Result<f64> {
        let len2 = self.inner(&w.v, &w.v);
        match *self {
            ModelSpace::GaussianPlane { lambda } if lambda != 0.0 => {
                let x = w.base.0;
                let dv = lambda * (x.x * w.v.x + x.y * w.v.y);
                match n {
                    EffDim::Infinite => Ok(lambda * len2),
                    EffDim::Finite(nn) if nn > 2.0 => Ok(lambda * len2 - dv * dv / (nn - 2.0)),
                    EffDim::Finite(_) => Err(LabError::InvalidParam("N = dim requires V = 0".into())),
                }
            }
            _ => {
                check_dim(n)?;
                Ok(self.curvature() * len2)
            }
        }
    }

    /// Greatest `K'` with `Ric_{N,nu} >= K' g` on the ball of the given radius about `center`.
    pub fn ricci_lower_bound(&self, n: EffDim, center: &Point, radius: f64) -> Result<f64> {
        check_dim(n)?;
        match *self {
            ModelSpace::GaussianPlane { lambda } if lambda != 0.0 => match n {
                EffDim::Infinite => Ok(lambda),
                EffDim::Finite(nn) if nn > 2.0 => {
                    let reach = center.xy().norm() + radius;
                    Ok(lambda - lambda * lambda * reach * reach / (nn - 2.0))
                }
                EffDim::Finite(_) => Err(LabError::InvalidParam("N = dim requires V = 0".into())),
            },
            _ => Ok(self.curvature()),
        }
    }

    /// `K = max(0, -K')` for a ball.
    pub fn curvature_bound(&self, n: EffDim, center: &Point, radius: f64) -> Result<f64> {
        Ok((-self.ricci_lower_bound(n, center, radius)?).max(0.0))
    }
}

fn check_dim(n: EffDim) -> Result<()> {
    match n {
        EffDim::Finite(nn) if !(nn >= 2.0) => Err(LabError::InvalidParam(format!("N = {nn} below dimension 2"))),
        _ => Ok(()),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LabError::InvalidParam(format!("{name} = {x} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_examples() {
        let e = ModelSpace::Euclidean;
        assert_eq!(e.distance(&Point::planar(0.0, 0.0), &Point::planar(3.0, 4.0)).unwrap(), 5.0);
        let s = ModelSpace::sphere(1.0).unwrap();
        let d = s.distance(&s.origin(), &Point(Vector3::x())).unwrap();
        assert_abs_diff_eq!(d, PI / 2.0, epsilon = 1e-15);
        let h = ModelSpace::hyperbolic(1.0).unwrap();
        let p = Point(Vector3::new(1f64.cosh(), 1f64.sinh(), 0.0));
        assert_abs_diff_eq!(h.distance(&p, &h.origin()).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(s.distance(&s.origin(), &Point(-Vector3::z())), Err(LabError::Antipodal));
    }

    #[test]
    fn exp_examples() {
        let s = ModelSpace::sphere(1.0).unwrap();
        let v = TangentVector { base: s.origin(), v: Vector3::x() * (PI / 2.0) };
        let q = s.exp_map(&v).unwrap();
        assert_abs_diff_eq!((q.0 - Vector3::x()).norm(), 0.0, epsilon = 1e-15);
        let back = s.log_map(&s.origin(), &q).unwrap();
        assert_abs_diff_eq!((back.v - v.v).norm(), 0.0, epsilon = 1e-14);
        let e = ModelSpace::Euclidean;
        let v = TangentVector { base: Point::planar(0.0, 0.0), v: Vector3::new(1.0, 2.0, 0.0) };
        assert_eq!(e.exp_map(&v).unwrap(), Point::planar(1.0, 2.0));
        let far = TangentVector { base: s.origin(), v: Vector3::x() * 4.0 };
        assert!(matches!(s.exp_map(&far), Err(LabError::CutRadius { .. })));
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let h = ModelSpace::hyperbolic(2.0).unwrap();
        let p = h.polar_point(&h.origin(), &h.frame(&h.origin()), 1.3, 0.7);
        h.check_point(&p).unwrap();
        let [e1, e2] = h.frame(&p);
        assert_abs_diff_eq!(h.inner(&e1, &e1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.inner(&e2, &e2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.inner(&e1, &e2), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h.inner(&e1, &p.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ricci_examples() {
        let c = Point::planar(0.0, 0.0);
        assert_eq!(ModelSpace::Euclidean.ricci_lower_bound(EffDim::Finite(3.0), &c, 1.0).unwrap(), 0.0);
        let h = ModelSpace::hyperbolic(1.0).unwrap();
        assert_eq!(h.ricci_lower_bound(EffDim::Finite(2.0), &h.origin(), 1.0).unwrap(), -1.0);
        let g = ModelSpace::gaussian(1.0).unwrap();
        assert_eq!(g.ricci_lower_bound(EffDim::Finite(4.0), &c, 1.0).unwrap(), 0.5);
        assert_eq!(g.ricci_lower_bound(EffDim::Infinite, &c, 1.0).unwrap(), 1.0);
        assert!(g.ricci_lower_bound(EffDim::Finite(2.0), &c, 1.0).is_err());
    }

    #[test]
    fn model_json_shape() {
        let s: ModelSpace = serde_json::from_str(r#"{"kind":"sphere","k":1.0,"lambda":0}"#).unwrap();
        assert_eq!(s, ModelSpace::Sphere { k: 1.0 });
        let g: ModelSpace = serde_json::from_str(r#"{"kind":"gaussian","lambda":2}"#).unwrap();
        assert_eq!(g, ModelSpace::GaussianPlane { lambda: 2.0 });
        assert_eq!(serde_json::to_string(&ModelSpace::Hyperbolic { k: 1.0 }).unwrap(), r#"{"kind":"hyperbolic","k":1.0}"#);
    }
}
