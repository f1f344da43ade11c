//! The local growth lemma: a nonnegative supersolution with `inf_{B_{r/2}} u <= 1`
//! stays below `M` on a `mu`-fraction of `B_{r/18}`.
//!
//! Besides the conclusion itself, the proof pipeline is replayed: the barrier
//! `w = u + psi`, the location of the contact set of `w` with opening `1/r^2`
//! and vertices in `B_{r/6}(y0)`, and the lower bound on its measure near
//! `x0`. That contact set has radius of order `r / beta1`, far below the grid
//! spacing of `B_r`, so it is measured on a second grid zoomed onto `x0`.

use super::checks::LAPLACIAN_TOL;
use super::pucci::{effective_params, pucci};
use crate::abp::{contact_vertex, disc_fraction};
use crate::barrier::{BarrierSpec, JUNCTION};
use crate::constants::{build_ledger, ln_doubling, ConstantsLedger};
use crate::contact::{check_contact_location, ContactSearch, TIE_TOL};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::measure::integral_i;
use crate::model::field::{Field, Sum};
use crate::model::grid::ball_measure;
use crate::model::{GeodesicBallGrid, ModelSpace, Point, ScalarField};
use crate::report::CheckReport;
use nalgebra::DMatrix;
use std::f64::consts::TAU;
use std::sync::Arc;

const ANCHOR: &str = "local growth";
const CIRCLE_SAMPLES: usize = 512;
const ZOOM_PAD: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// `Delta_nu u <= f`
    Laplacian,
    /// `M^-_theta[Hess u] <= f`, unweighted models only.
    PucciMinus(f64),
}

#[derive(Debug, Clone)]
pub struct GrowthInstance {
    pub model: ModelSpace,
    pub x0: Point,
    pub r: f64,
    pub u: Arc<dyn Field>,
    pub f: Arc<dyn Field>,
    pub operator: Operator,
    pub resolution: usize,
}

impl GrowthInstance {
    pub fn new(model: ModelSpace, x0: Point, r: f64, u: Arc<dyn Field>, f: Arc<dyn Field>) -> Self {
        GrowthInstance { model, x0, r, u, f, operator: Operator::Laplacian, resolution: 64 }
    }

    pub fn with_operator(mut self, op: Operator) -> Self {
        self.operator = op;
        self
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.resolution = n;
        self
    }
}

fn grid(m: ModelSpace, c: Point, r: f64, n: usize) -> Result<Arc<GeodesicBallGrid>> {
    Ok(Arc::new(GeodesicBallGrid::square(m, c, r, n)?))
}

/// Nodes of `B_{r/2}` plus samples on its bounding circle.
fn half_ball_points(g: &GeodesicBallGrid, r: f64) -> Vec<Point> {
    let m = g.model;
    let mut pts: Vec<Point> = (0..g.len()).filter(|&i| g.node_radius(i) <= 0.5 * r).map(|i| g.nodes[i]).collect();
    pts.extend((0..CIRCLE_SAMPLES).map(|j| m.polar_point(&g.center, &g.frame, 0.5 * r, TAU * j as f64 / CIRCLE_SAMPLES as f64)));
    pts
}

/// Worst scaled excess of the operator over `f` on the nodes; positive means violated.
fn operator_defect(inst: &GrowthInstance, g: &GeodesicBallGrid) -> Result<f64> {
    let m = inst.model;
    let mut worst = f64::NEG_INFINITY;
    for p in &g.nodes {
        let jet = inst.u.jet(&m, p).ok_or(LabError::MissingClosedForm)?;
        let lhs = match inst.operator {
            Operator::Laplacian => m.laplacian_from_jet(p, &jet),
            Operator::PucciMinus(theta) => {
                let h = m.form_in_frame(p, &jet.hess);
                pucci(&DMatrix::from_iterator(2, 2, h.iter().copied()), theta)?.0
            }
        };
        let f = inst.f.value(&m, p);
        worst = worst.max((lhs - f) / lhs.abs().max(f.abs()).max(1.0));
    }
    Ok(worst)
}

/// Radius beyond which `r^2 |grad w| > rho + d0 + r/6`, so no contact vertex can
/// reach `B_{r/6}(y0)`. `r h'(t) - r^2 G - rho` is concave on the cubic piece,
/// so one sign change is found by bisection.
fn zoom_radius(spec: &BarrierSpec, r: f64, grad_bound: f64, d0: f64) -> f64 {
    let gap = |rho: f64| r * spec.cubic(rho / r)[1] - r * r * grad_bound - rho - d0 - r / 6.0;
    let hi = JUNCTION * r;
    if gap(hi) <= 0.0 {
        return hi;
    }
    let (mut lo, mut up) = (0.0, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + up);
        if gap(mid) > 0.0 {
            up = mid;
        } else {
            lo = mid;
        }
    }
    (ZOOM_PAD * up).min(hi)
}

struct ZoomContact {
    measure: f64,
    max_u: f64,
    nodes: usize,
    radius: f64,
    grad_bound: f64,
}

/// `nu[A cap B_{r/18}(x0)]` on the zoom grid, with fractional cell coverage of
/// the vertex disc and a minimizer test against both grids.
#[allow(clippy::too_many_arguments)]
fn zoom_contact(
    inst: &GrowthInstance,
    spec: &BarrierSpec,
    w: &Arc<dyn Field>,
    coarse: &ScalarField,
    y0: &Point,
    small: &GeodesicBallGrid,
    exec: Exec,
) -> Result<ZoomContact> {
    let m = inst.model;
    let r = inst.r;
    let a = 1.0 / (r * r);
    let mut grad_bound = 0.0f64;
    for p in &small.nodes {
        let jet = inst.u.jet(&m, p).ok_or(LabError::MissingClosedForm)?;
        grad_bound = grad_bound.max(m.norm(&jet.grad));
    }
    grad_bound *= 1.25;
    let d0 = m.dist(&inst.x0, y0);
    let radius = zoom_radius(spec, r, grad_bound, d0);
    let zg = grid(m, inst.x0, radius, inst.resolution)?;
    let zoom = ScalarField::sample(zg.clone(), w.clone());
    let coarse_search = ContactSearch::new(&coarse.grid, &coarse.values, a)?;
    let zoom_search = ContactSearch::new(&zg, &zoom.values, a)?;
    let s = r / 6.0;
    let cover = exec.map(zg.len(), |i| -> Result<f64> {
        let frac = disc_fraction(&zoom, a, i, y0, s)?;
        if frac == 0.0 {
            return Ok(0.0);
        }
        let y = contact_vertex(&zoom, a, &zg.nodes[i])?;
        let best = coarse_search.minimize(&y).0.min(zoom_search.minimize(&y).0);
        Ok(if zoom_search.phi(i, &y) <= best + TIE_TOL * best.abs().max(1.0) { frac } else { 0.0 })
    });
    let (mut measure, mut max_u, mut nodes) = (0.0, f64::NEG_INFINITY, 0);
    for (i, c) in cover.into_iter().enumerate() {
        let c = c?;
        if c > 0.0 {
            measure += c * zg.weights[i];
            max_u = max_u.max(inst.u.value(&m, &zg.nodes[i]));
            nodes += 1;
        }
    }
    Ok(ZoomContact { measure, max_u, nodes, radius, grad_bound })
}

/// Checks the growth lemma on `B_r(x0)` with the big ball `B_{2R}(x0)`,
/// `R = ledger.params.r`. Under `Operator::PucciMinus` the constants are
/// rebuilt with `sqrt(K) R` replaced by `sqrt(K) R + E_theta(2R)`.
///
/// Returns the conclusion first, then the pipeline reports. A violated premise
/// yields the conclusion report alone.
pub fn growth_check(inst: &GrowthInstance, ledger: &ConstantsLedger) -> Result<Vec<CheckReport>> {
    growth_check_with(inst, ledger, Exec::default())
}

pub fn growth_check_with(inst: &GrowthInstance, ledger: &ConstantsLedger, exec: Exec) -> Result<Vec<CheckReport>> {
    let m = inst.model;
    let r = inst.r;
    let big_r = ledger.params.r;
    let name = "growth.measure_ratio";
    if !(r > 0.0 && r <= big_r) {
        return Err(LabError::InvalidParam(format!("need 0 < r <= R, got r = {r}, R = {big_r}")));
    }
    let l = match inst.operator {
        Operator::Laplacian => ledger.clone(),
        Operator::PucciMinus(theta) => {
            if m.lambda() != 0.0 {
                return Err(LabError::Unsupported("Pucci operators on weighted models".into()));
            }
            build_ledger(effective_params(&m, &ledger.params, theta)?)?
        }
    };
    let premise = |p: &str| CheckReport::premise_failure(name, ANCHOR, p).non_sharp();

    let ric = m.ricci_lower_bound(ledger.params.n, &inst.x0, 2.0 * big_r)?;
    if ric < -ledger.params.k * (1.0 + 1e-12) - 1e-12 {
        return Ok(vec![premise("Ric_{N,nu} >= -K g on B_{2R}").diag_f64("ricci_lower_bound", ric)]);
    }
    let big = grid(m, inst.x0, 2.0 * big_r, inst.resolution)?;
    let f_big = ScalarField::sample(big, inst.f.clone());
    let i_f = integral_i(&f_big, l.n(), 1.0)?;
    if i_f > l.delta0 {
        return Ok(vec![premise("I(f, B_{2R}, 1) <= delta0").diag_f64("integral", i_f).diag_f64("delta0", l.delta0)]);
    }
    let ball = grid(m, inst.x0, r, inst.resolution)?;
    let u_min = ball.nodes.iter().map(|p| inst.u.value(&m, p)).fold(f64::INFINITY, f64::min);
    if u_min < 0.0 {
        return Ok(vec![premise("u >= 0 in B_r(x0)").diag_f64("min_u", u_min)]);
    }
    let half = half_ball_points(&ball, r);
    let half_inf = half.iter().map(|p| inst.u.value(&m, p)).fold(f64::INFINITY, f64::min);
    if half_inf > 1.0 + 1e-12 {
        return Ok(vec![premise("inf_{B_{r/2}} u <= 1").diag_f64("inf_half", half_inf)]);
    }
    let defect = operator_defect(inst, &ball)?;
    if defect > LAPLACIAN_TOL {
        let p = match inst.operator {
            Operator::Laplacian => "Delta_nu u <= f in B_r(x0)",
            Operator::PucciMinus(_) => "M^-_theta[Hess u] <= f in B_r(x0)",
        };
        return Ok(vec![premise(p).diag_f64("defect", defect)]);
    }

    // conclusion
    let ln_ball = ball_measure(&m, &inst.x0, r)?.value.ln();
    let small = grid(m, inst.x0, r / 18.0, inst.resolution)?;
    let below: f64 = (0..small.len()).filter(|&i| inst.u.value(&m, &small.nodes[i]) <= l.big_m).map(|i| small.weights[i]).sum();
    let ln_ratio = below.ln() - ln_ball;
    let mut out = vec![CheckReport::inequality(name, ANCHOR, l.ln_mu, ln_ratio)
        .tol(0.0, 1e-12)
        .diag("scale", "log")
        .diag_f64("big_m", l.big_m)
        .diag_f64("integral", i_f)
        .diag_f64("delta0", l.delta0)
        .diag_f64("alpha", l.alpha)
        .non_sharp()];

    // barrier
    let spec = BarrierSpec::new(l.alpha, m, inst.x0, r)?;
    let w: Arc<dyn Field> = Arc::new(Sum::new().with(1.0, inst.u.clone()).with(1.0, spec.field()));
    let tail = 18f64.powf(l.alpha);
    let (y0, w_y0) = half
        .iter()
        .map(|p| (*p, w.value(&m, p)))
        .fold((inst.x0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    let top = 1.0 + tail - 2f64.powf(l.alpha);
    out.push(CheckReport::inequality("growth.barrier_min", ANCHOR, w_y0, top).tol(1e-12, 0.0).non_sharp());
    let floor = tail - (4.0f64 / 3.0).powf(l.alpha);
    let annulus = (0..ball.len())
        .filter(|&i| ball.node_radius(i) >= 0.75 * r)
        .map(|i| w.value(&m, &ball.nodes[i]))
        .fold(f64::INFINITY, f64::min);
    out.push(CheckReport::inequality("growth.barrier_annulus", ANCHOR, floor, annulus).tol(1e-12, 0.0).non_sharp());

    // location of the contact set
    let coarse = ScalarField::sample(ball.clone(), w.clone());
    let a = 1.0 / (r * r);
    let mut loc = check_contact_location(&coarse, a, &y0, w_y0, floor)?;
    loc.name = "growth.location".into();
    out.push(loc.non_sharp());

    // measure of the contact set near x0
    let z = zoom_contact(inst, &spec, &w, &coarse, &y0, &small, exec)?;
    out.push(
        CheckReport::inequality("growth.sublevel", ANCHOR, z.max_u, l.big_m)
            .tol(1e-12, 0.0)
            .diag("contact_nodes", z.nodes)
            .non_sharp(),
    );
    let n = l.n();
    let ln_bound = -n * (3.0 * 18f64.ln() + 2.0 * l.alpha.ln() + l.alpha * 18f64.ln() + (l.omega * r).cosh().ln())
        - 4.0 * ln_doubling(l.params.k, n, 2.0 * r);
    let ln_a = z.measure.ln() - ln_ball;
    out.push(
        CheckReport::inequality("growth.mu_estimate", "mu estimate", ln_bound, ln_a)
            .tol(0.0, 1e-12)
            .diag("scale", "log")
            .diag_f64("zoom_radius", z.radius)
            .diag_f64("gradient_bound", z.grad_bound)
            .diag("contact_nodes", z.nodes)
            .diag_f64("contact_measure", z.measure)
            .non_sharp(),
    );
    out.push(
        CheckReport::inequality("growth.mu_bound", "mu estimate", l.ln_mu, ln_bound)
            .tol(0.0, 1e-12)
            .diag("scale", "log")
            .non_sharp(),
    );
    Ok(out)
}
