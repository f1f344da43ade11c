//! Both sides of the measure estimate
//! `nu[E] <= int_A D_{K,N,r}[u/a]^N dnu` (and the `exp` form for `N = inf`).

use crate::constants::{omega, EffDim};
use crate::contact::{compute_contact_set_with, node_vertices, ContactSearch};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::model::grid::ball_measure;
use crate::model::{GeodesicBallGrid, Point, ScalarField, TangentVector};
use crate::report::CheckReport;
use crate::special::{cal_h_unchecked, cal_s_unchecked};

/// Relative tolerance of the measure estimate check.
pub const REL_TOL: f64 = 1e-6;

/// `D_{K,N,r}[u/a] = S(r w)[H(r w) + lap/(N a)]`, or `2 r^2 K + lap/a` for `N = inf`.
pub fn d_bound(k: f64, n: EffDim, r: f64, a: f64, lap_nu_u: f64) -> f64 {
    match n {
        EffDim::Finite(nn) => {
            let t = r * omega(k, nn);
            cal_s_unchecked(t) * (cal_h_unchecked(t) + lap_nu_u / (nn * a))
        }
        EffDim::Infinite => 2.0 * r * r * k + lap_nu_u / a,
    }
}

/// Integrand `max(D, 0)^N`, or `exp(D)` for `N = inf`.
pub fn integrand(d: f64, n: EffDim) -> f64 {
    match n {
        EffDim::Finite(nn) => d.max(0.0).powf(nn),
        EffDim::Infinite => d.exp(),
    }
}

/// Vertex set `E`: a union of grid cells, or a geodesic disc.
#[derive(Debug, Clone)]
pub enum VertexSet {
    Nodes(Vec<usize>),
    Disc { center: Point, radius: f64 },
}

/// One instance: `u` on the grid of `B_r`, vertex set `E`, opening `a`,
/// and the curvature data `(K, N)`. The radius in `D` is the ball radius.
#[derive(Debug, Clone)]
pub struct AbpInstance {
    pub u: ScalarField,
    pub a: f64,
    pub k: f64,
    pub n: EffDim,
    pub e: VertexSet,
}

impl AbpInstance {
    pub fn new(u: ScalarField, a: f64, k: f64, n: EffDim, e: Vec<usize>) -> Result<Self> {
        if e.is_empty() {
            return Err(LabError::EmptyVertexSet);
        }
        if !(a > 0.0) || !(k >= 0.0) {
            return Err(LabError::InvalidParam("need a > 0 and K >= 0".into()));
        }
        if e.iter().any(|&i| i >= u.grid.len()) {
            return Err(LabError::InvalidParam("vertex node out of range".into()));
        }
        Ok(AbpInstance { u, a, k, n, e: VertexSet::Nodes(e) })
    }

    /// Instance with `E = B_s(center)`. Needs a closed-form `u`.
    pub fn disc(u: ScalarField, a: f64, k: f64, n: EffDim, center: Point, s: f64) -> Result<Self> {
        let g = &u.grid;
        g.model.check_point(&center)?;
        if u.closed_form.is_none() {
            return Err(LabError::MissingClosedForm);
        }
        if !(s > 0.0) || g.model.dist(&g.center, &center) + s > g.radius {
            return Err(LabError::InvalidParam(format!("vertex disc of radius {s} leaves the ball")));
        }
        let nodes = vertex_disc(&u, &center, s);
        let mut inst = Self::new(u, a, k, n, nodes)?;
        inst.e = VertexSet::Disc { center, radius: s };
        Ok(inst)
    }

    /// Grid nodes standing in for `E` in the primal search.
    pub fn vertex_nodes(&self) -> Vec<usize> {
        match &self.e {
            VertexSet::Nodes(e) => e.clone(),
            VertexSet::Disc { center, radius } => vertex_disc(&self.u, center, *radius),
        }
    }

    /// Nodes strictly inside the geodesic disc of radius `s` about the grid center.
    pub fn disc_nodes(u: &ScalarField, s: f64) -> Vec<usize> {
        let g = &u.grid;
        (0..g.len()).filter(|&i| g.node_radius(i) < s).collect()
    }
}

/// Outcome of one evaluation, also stored in report diagnostics.
#[derive(Debug, Clone)]
pub struct AbpOutcome {
    pub lhs: f64,
    pub rhs: f64,
    /// Contact nodes used for the right-hand side.
    pub contact: Vec<usize>,
    /// `"dual"` (closed-form gradient) or `"primal"`.
    pub method: &'static str,
    pub primal_nodes: usize,
    pub primal_rhs: f64,
    pub anomalies: usize,
    pub min_d: f64,
}

impl AbpOutcome {
    pub fn relative_gap(&self) -> f64 {
        (self.rhs - self.lhs) / self.lhs
    }
}

/// Evaluates both sides.
///
/// The contact set is classified from the vertex side when `u` has a closed
/// form: node `x` is a contact point iff `y = exp_x(grad u(x) / a)` falls in
/// a cell of `E` and `x` minimizes `u + (a/2) rho_y^2` over the grid. The
/// primal set (nodes hit by minimizing from each vertex node) undercounts
/// wherever the contact map expands, so it is kept only for the boundary
/// hypothesis and as a diagnostic.
pub fn evaluate(inst: &AbpInstance, exec: Exec) -> Result<AbpOutcome> {
    let u = &inst.u;
    let g = &*u.grid;
    let m = g.model;
    let r = g.radius;
    let e_nodes = inst.vertex_nodes();
    let lhs = match &inst.e {
        VertexSet::Nodes(e) => g.measure_of(e),
        VertexSet::Disc { center, radius } => ball_measure(&m, center, *radius)?.value,
    };

    let vertices = node_vertices(g, &e_nodes);
    let primal = compute_contact_set_with(u, inst.a, &vertices, exec)?;
    if primal.boundary_touches > 0 {
        return Err(LabError::ContactTouchesBoundary { count: primal.boundary_touches });
    }
    let primal_nodes = primal.contact_nodes();

    let lap: Vec<Result<f64>> = exec.map(g.len(), |i| u.laplacian_nu_at(i));
    let d_at = |i: usize| -> Result<f64> {
        let l = lap[i].as_ref().map_err(Clone::clone)?;
        Ok(d_bound(inst.k, inst.n, r, inst.a, *l))
    };

    let mut frac = vec![1.0; g.len()];
    let (contact, method) = if let VertexSet::Disc { center, radius } = &inst.e {
        let search = ContactSearch::new(g, &u.values, inst.a)?;
        let cover = exec.map(g.len(), |i| -> Result<f64> {
            let f = disc_fraction(u, inst.a, i, center, *radius)?;
            let y = contact_vertex(u, inst.a, &g.nodes[i])?;
            Ok(if f > 0.0 && search.is_minimizer(i, &y) { f } else { 0.0 })
        });
        let mut nodes = Vec::new();
        for (i, c) in cover.into_iter().enumerate() {
            let c = c?;
            if c > 0.0 {
                frac[i] = c;
                nodes.push(i);
            }
        }
        (nodes, "dual_fractional")
    } else if u.closed_form.is_some() {
        let mut in_e = vec![false; g.len()];
        for &i in &e_nodes {
            in_e[i] = true;
        }
        let search = ContactSearch::new(g, &u.values, inst.a)?;
        let flags = exec.map(g.len(), |i| {
            let Some(jet) = u.jet_at(i) else { return false };
            let v = TangentVector { base: g.nodes[i], v: jet.grad / inst.a };
            let Ok(y) = m.exp_map(&v) else { return false };
            match g.locate(&y) {
                Some(c) if in_e[c] => search.is_minimizer(i, &y),
                _ => false,
            }
        });
        ((0..g.len()).filter(|&i| flags[i]).collect::<Vec<_>>(), "dual")
    } else {
        (primal_nodes.clone(), "primal")
    };

    let mut rhs = 0.0;
    let mut anomalies = 0;
    let mut min_d = f64::INFINITY;
    for &i in &contact {
        let d = d_at(i)?;
        min_d = min_d.min(d);
        if d < -1e-3 {
            anomalies += 1;
        }
        rhs += integrand(d, inst.n) * frac[i] * g.weights[i];
    }
    let mut primal_rhs = 0.0;
    for &i in &primal_nodes {
        primal_rhs += integrand(d_at(i)?, inst.n) * g.weights[i];
    }
    Ok(AbpOutcome { lhs, rhs, contact, method, primal_nodes: primal_nodes.len(), primal_rhs, anomalies, min_d })
}

pub fn abp_check(inst: &AbpInstance) -> Result<CheckReport> {
    abp_check_with(inst, Exec::default())
}

/// Certifies `nu[E] <= rhs (1 + 1e-6)`. Requires `Ric_{N,nu} >= -K` on the ball.
pub fn abp_check_with(inst: &AbpInstance, exec: Exec) -> Result<CheckReport> {
    let name = "abp.measure_estimate";
    let anchor = "Measure Estimate Formula";
    let g = &*inst.u.grid;
    let ric = g.model.ricci_lower_bound(inst.n, &g.center, g.radius)?;
    if ric < -inst.k * (1.0 + 1e-12) - 1e-12 {
        return Ok(CheckReport::premise_failure(name, anchor, "Ric_{N,nu} >= -K g on the ball").diag_f64("ricci_lower_bound", ric));
    }
    let out = match evaluate(inst, exec) {
        Ok(o) => o,
        Err(LabError::ContactTouchesBoundary { count }) => {
            return Ok(CheckReport::premise_failure(name, anchor, "A(a, E/B_r, u) inside B_r").diag("boundary_touches", count))
        }
        Err(e) => return Err(e),
    };
    Ok(CheckReport::inequality(name, anchor, out.lhs, out.rhs)
        .tol(REL_TOL, 0.0)
        .diag_f64("relative_gap", out.relative_gap())
        .diag("method", out.method)
        .diag("contact_nodes", out.contact.len())
        .diag("primal_nodes", out.primal_nodes)
        .diag_f64("primal_rhs", out.primal_rhs)
        .diag("anomalies", out.anomalies)
        .diag_f64("min_d", out.min_d)
        .diag_f64("ricci_lower_bound", ric)
        .diag("resolution", format!("{}x{}", g.n_r, g.n_theta)))
}

/// `exp_x(grad u(x) / a)` from the closed form.
pub(crate) fn contact_vertex(u: &ScalarField, a: f64, x: &Point) -> Result<Point> {
    let m = u.grid.model;
    let f = u.closed_form.as_ref().ok_or(LabError::MissingClosedForm)?;
    let jet = f.jet(&m, x).ok_or(LabError::MissingClosedForm)?;
    m.exp_map(&TangentVector { base: *x, v: jet.grad / a })
}

/// Fraction of the cell of node `i` whose contact vertices fall in
/// `B_s(center)`, with `rho(exp_x(grad u / a), center)` linearized over the
/// cell by central differences.
pub(crate) fn disc_fraction(u: &ScalarField, a: f64, i: usize, center: &Point, s: f64) -> Result<f64> {
    let g: &GeodesicBallGrid = &u.grid;
    let m = g.model;
    let dist_at = |rho: f64, theta: f64| -> Result<f64> {
        let x = m.polar_point(&g.center, &g.frame, rho, theta);
        Ok(m.dist(&contact_vertex(u, a, &x)?, center))
    };
    let (rho, theta) = (g.node_radius(i), g.node_angle(i));
    let psi = m.metric_coeff(rho);
    let g0 = dist_at(rho, theta)?;
    let (half_r, half_t) = (0.5 * g.d_rho, 0.5 * psi * g.d_theta);
    let eps = 1e-5 * g.radius;
    let p = (dist_at(rho + eps, theta)? - dist_at(rho - eps, theta)?) / (2.0 * eps);
    let q = (dist_at(rho, theta + eps / psi)? - dist_at(rho, theta - eps / psi)?) / (2.0 * eps);
    Ok(half_plane_fraction(s - g0, p.abs() * 2.0 * half_r, q.abs() * 2.0 * half_t))
}

/// Area fraction of the unit square where `p x + q y < t + (p + q)/2`,
/// `p, q >= 0`: the share of a cell where a linear function centered at the
/// cell midpoint stays below its threshold.
fn half_plane_fraction(t: f64, p: f64, q: f64) -> f64 {
    let big = p.max(q);
    if big == 0.0 {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let small = p.min(q);
    let tt = t + 0.5 * (p + q);
    if small <= 1e-6 * big {
        return (tt / big).clamp(0.0, 1.0);
    }
    let r2 = |x: f64| x.max(0.0).powi(2);
    let area = (r2(tt) - r2(tt - p) - r2(tt - q) + r2(tt - p - q)) / (2.0 * p * q);
    area.clamp(0.0, 1.0)
}

/// Disc of radius `s` about `center` as a vertex set of grid nodes.
pub fn vertex_disc(u: &ScalarField, center: &Point, s: f64) -> Vec<usize> {
    let g = &u.grid;
    (0..g.len()).filter(|&i| g.model.dist(center, &g.nodes[i]) < s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_bound_examples() {
        assert!((d_bound(0.0, EffDim::Finite(2.0), 1.0, 1.0, 3.0) - 2.5).abs() < 1e-15);
        assert_eq!(d_bound(0.0, EffDim::Infinite, 1.0, 2.0, 3.0), 1.5);
        let v = d_bound(1.0, EffDim::Finite(2.0), 1.0, 1.0, 0.0);
        assert!((v - 2f64.sqrt().cosh()).abs() < 1e-14);
        assert!((v - 2.1781835566085708).abs() < 1e-13);
    }

    #[test]
    fn half_plane_fractions() {
        assert_eq!(half_plane_fraction(0.0, 1.0, 0.0), 0.5);
        assert_eq!(half_plane_fraction(0.0, 1.0, 1.0), 0.5);
        assert_eq!(half_plane_fraction(2.0, 1.0, 1.0), 1.0);
        assert_eq!(half_plane_fraction(-2.0, 1.0, 1.0), 0.0);
        assert!((half_plane_fraction(-0.5, 1.0, 1.0) - 0.125).abs() < 1e-15);
        assert!((half_plane_fraction(0.25, 1.0, 0.5) - 0.75).abs() < 1e-15);
    }
}
