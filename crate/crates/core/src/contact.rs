//! Contact sets `A(a, E/Omega, u)`: nodes where a concave paraboloid
//! `-(a/2) rho_y^2 + c` with vertex `y` in `E` touches `u` from below.

use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::model::{GeodesicBallGrid, ModelSpace, Point, ScalarField};
use crate::report::CheckReport;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;

const BLOCK: usize = 8;

/// Relative tie tolerance for minimizers.
pub const TIE_TOL: f64 = 1e-12;

fn tie_window(best: f64) -> f64 {
    TIE_TOL * best.abs().max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct ContactPair {
    /// Position of the vertex in the vertex list.
    pub vertex: usize,
    /// Grid node of the contact point.
    pub node: usize,
    pub x: Point,
    pub y: Point,
    pub a: f64,
    /// Paraboloid level `c_y = min_z u(z) + (a/2) rho^2(z, y)`.
    pub c: f64,
    /// `u(x) + (a/2) rho^2(x, y)` at this contact point.
    pub min_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContactSet {
    pub a: f64,
    pub pairs: Vec<ContactPair>,
    #[serde(skip)]
    pub vertices: Vec<Point>,
    /// Pairs whose contact point sits on the outermost ring.
    pub boundary_touches: usize,
}

impl ContactSet {
    /// Distinct contact nodes, sorted.
    pub fn contact_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pairs.iter().map(|p| p.node).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Every vertex has at least one contact point.
    pub fn covers_all_vertices(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        for p in &self.pairs {
            seen[p.vertex] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn max_pair_distance(&self, m: &ModelSpace) -> f64 {
        self.pairs.iter().map(|p| m.dist(&p.x, &p.y)).fold(0.0, f64::max)
    }
}

struct Block {
    anchor: Point,
    radius: f64,
    min_u: f64,
    nodes: Vec<usize>,
}

/// Branch-and-bound minimizer of `u + (a/2) rho^2(., y)` over grid nodes.
///
/// Nodes are grouped in 8 x 8 polar blocks; a block is skipped once
/// `min_u + (a/2) (rho(anchor, y) - radius)_+^2` exceeds the incumbent.
pub struct ContactSearch<'a> {
    grid: &'a GeodesicBallGrid,
    values: &'a [f64],
    a: f64,
    blocks: Vec<Block>,
}

impl<'a> ContactSearch<'a> {
    pub fn new(grid: &'a GeodesicBallGrid, values: &'a [f64], a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::InvalidParam(format!("opening a = {a} must be > 0")));
        }
        if values.len() != grid.len() {
            return Err(LabError::InvalidParam("field does not match grid".into()));
        }
        let m = grid.model;
        let mut blocks = Vec::new();
        for i0 in (0..grid.n_r).step_by(BLOCK) {
            let i1 = (i0 + BLOCK).min(grid.n_r);
            for j0 in (0..grid.n_theta).step_by(BLOCK) {
                let j1 = (j0 + BLOCK).min(grid.n_theta);
                let nodes: Vec<usize> =
                    (i0..i1).flat_map(|i| (j0..j1).map(move |j| (i, j))).map(|(i, j)| grid.index(i, j)).collect();
                let anchor = grid.nodes[grid.index((i0 + i1) / 2, (j0 + j1) / 2)];
                let radius = nodes.iter().map(|&n| m.dist(&anchor, &grid.nodes[n])).fold(0.0, f64::max);
                let min_u = nodes.iter().map(|&n| values[n]).fold(f64::INFINITY, f64::min);
                blocks.push(Block { anchor, radius: radius * (1.0 + 1e-12), min_u, nodes });
            }
        }
        Ok(ContactSearch { grid, values, a, blocks })
    }

    pub fn opening(&self) -> f64 {
        self.a
    }

    /// `(min value, all minimizing nodes within the tie window, sorted)`.
    pub fn minimize(&self, y: &Point) -> (f64, Vec<usize>) {
        let m = self.grid.model;
        let half_a = 0.5 * self.a;
        let lbs: Vec<f64> = self
            .blocks
            .iter()
            .map(|blk| {
                let gap = (m.dist(&blk.anchor, y) - blk.radius).max(0.0);
                blk.min_u + half_a * gap * gap
            })
            .collect();
        let first = (0..lbs.len()).min_by(|&p, &q| lbs[p].total_cmp(&lbs[q])).unwrap_or(0);
        let mut best = f64::INFINITY;
        let mut cands: Vec<(usize, f64)> = Vec::new();
        for b in std::iter::once(first).chain((0..lbs.len()).filter(|&b| b != first)) {
            if lbs[b] > best + tie_window(best) {
                continue;
            }
            for &n in &self.blocks[b].nodes {
                let d = m.dist(&self.grid.nodes[n], y);
                let phi = self.values[n] + half_a * d * d;
                if phi < best {
                    best = phi;
                }
                if phi <= best + tie_window(best) {
                    cands.push((n, phi));
                }
            }
        }
        let w = tie_window(best);
        let mut nodes: Vec<usize> = cands.into_iter().filter(|&(_, phi)| phi <= best + w).map(|(n, _)| n).collect();
        nodes.sort_unstable();
        nodes.dedup();
        (best, nodes)
    }

    /// `u(x) + (a/2) rho^2(x, y)` at node `x`.
    pub fn phi(&self, x: usize, y: &Point) -> f64 {
        let d = self.grid.model.dist(&self.grid.nodes[x], y);
        self.values[x] + 0.5 * self.a * d * d
    }

    /// Whether node `x` minimizes `phi_y` up to the tie window.
    pub fn is_minimizer(&self, x: usize, y: &Point) -> bool {
        let (best, _) = self.minimize(y);
        self.phi(x, y) <= best + tie_window(best)
    }
}

/// Upper bound on the diameter of a vertex set.
fn vertex_diameter(m: &ModelSpace, center: &Point, vertices: &[Point]) -> f64 {
    let about = |c: &Point| 2.0 * vertices.iter().map(|y| m.dist(c, y)).fold(0.0, f64::max);
    about(center).min(about(&vertices[0]))
}

/// Checks the sphere reach condition `diam(Omega) + diam(E) < pi / (2 sqrt k)`.
pub fn check_reach(grid: &GeodesicBallGrid, vertices: &[Point]) -> Result<()> {
    if let ModelSpace::Sphere { k } = grid.model {
        let reach = 2.0 * grid.radius + vertex_diameter(&grid.model, &grid.center, vertices);
        let limit = FRAC_PI_2 / k.sqrt();
        if reach >= limit {
            return Err(LabError::CutRadius { norm: reach, cut: limit });
        }
    }
    Ok(())
}

/// Grid nodes as vertices.
pub fn node_vertices(grid: &GeodesicBallGrid, nodes: &[usize]) -> Vec<Point> {
    nodes.iter().map(|&n| grid.nodes[n]).collect()
}

pub fn compute_contact_set(u: &ScalarField, a: f64, vertices: &[Point]) -> Result<ContactSet> {
    compute_contact_set_with(u, a, vertices, Exec::default())
}

pub fn compute_contact_set_with(u: &ScalarField, a: f64, vertices: &[Point], exec: Exec) -> Result<ContactSet> {
    if vertices.is_empty() {
        return Err(LabError::EmptyVertexSet);
    }
    let grid = &*u.grid;
    for y in vertices {
        grid.model.check_point(y)?;
    }
    check_reach(grid, vertices)?;
    let search = ContactSearch::new(grid, &u.values, a)?;
    let per_vertex = exec.map(vertices.len(), |v| {
        let y = vertices[v];
        let (best, nodes) = search.minimize(&y);
        nodes
            .into_iter()
            .map(|n| ContactPair {
                vertex: v,
                node: n,
                x: grid.nodes[n],
                y,
                a,
                c: best,
                min_value: search.phi(n, &y),
            })
            .collect::<Vec<_>>()
    });
    let pairs: Vec<ContactPair> = per_vertex.into_iter().flatten().collect();
    let boundary_touches = pairs.iter().filter(|p| grid.is_outer_ring(p.node)).count();
    Ok(ContactSet { a, pairs, vertices: vertices.to_vec(), boundary_touches })
}

/// `|grad u(x) + a rho(x, y) grad rho_y(x)|`, which vanishes at interior contacts.
pub fn gradient_contact_residual(pair: &ContactPair, u: &ScalarField) -> Result<f64> {
    let m = u.model();
    let f = u.closed_form.as_ref().ok_or(LabError::MissingClosedForm)?;
    let jet = f.jet(&m, &pair.x).ok_or(LabError::MissingClosedForm)?;
    // rho grad rho_y = grad(rho_y^2 / 2) = -log_x(y)
    let v = m.log_map(&pair.x, &pair.y)?;
    let r = jet.grad - pair.a * v.v;
    Ok(m.norm(&r))
}

/// Contact location: with `u(y0) = l < t <= u` on the annulus
/// `B_r \ B_{5r/6}(x0)`, every contact point of `A(a, B_{r/6}(y0) / B_r(x0), u)`
/// lies in `B_{5r/6}(x0)` and satisfies `u <= l + a r^2 / 36`.
///
/// `x0` and `r` are the center and radius of the field's grid.
pub fn check_contact_location(u: &ScalarField, a: f64, y0: &Point, l: f64, t: f64) -> Result<CheckReport> {
    let grid = &*u.grid;
    let m = grid.model;
    let (x0, r) = (grid.center, grid.radius);
    let name = "contact.location";
    let anchor = "contact location";
    if !(l < t) {
        return Ok(CheckReport::premise_failure(name, anchor, "l < t"));
    }
    if m.dist(&x0, y0) > 0.5 * r * (1.0 + 1e-12) {
        return Ok(CheckReport::premise_failure(name, anchor, "y0 in closed B_{r/2}(x0)"));
    }
    let u_y0 = match &u.closed_form {
        Some(f) => f.value(&m, y0),
        None => match grid.locate(y0) {
            Some(n) => u.values[n],
            None => return Ok(CheckReport::premise_failure(name, anchor, "y0 inside the grid")),
        },
    };
    if (u_y0 - l).abs() > 1e-9 * l.abs().max(1.0) {
        return Ok(CheckReport::premise_failure(name, anchor, "u(y0) = l").diag_f64("u_y0", u_y0));
    }
    let inner = 5.0 * r / 6.0;
    let annulus_min = (0..grid.len())
        .filter(|&n| m.dist(&x0, &grid.nodes[n]) >= inner)
        .map(|n| u.values[n])
        .fold(f64::INFINITY, f64::min);
    if annulus_min < t {
        return Ok(CheckReport::premise_failure(name, anchor, "u >= t on B_r \\ B_{5r/6}(x0)")
            .diag_f64("annulus_min", annulus_min));
    }
    let mut vertices = vec![*y0];
    vertices.extend(grid.nodes.iter().filter(|p| m.dist(y0, p) <= r / 6.0 && m.dist(y0, p) > 0.0));
    let set = compute_contact_set(u, a, &vertices)?;
    let level = l + a * r * r / 36.0;
    let tol = 1e-9 * level.abs().max(1.0);
    let mut violations = 0usize;
    let mut max_radius = 0.0f64;
    let mut max_level = f64::NEG_INFINITY;
    for p in &set.pairs {
        let rho = m.dist(&x0, &p.x);
        let val = u.values[p.node];
        max_radius = max_radius.max(rho);
        max_level = max_level.max(val);
        if rho >= inner || val > level + tol {
            violations += 1;
        }
    }
    Ok(CheckReport::inequality(name, anchor, violations as f64, 0.0)
        .diag("pairs", set.pairs.len())
        .diag_f64("max_contact_radius", max_radius)
        .diag_f64("radius_bound", inner)
        .diag_f64("max_contact_level", max_level)
        .diag_f64("level_bound", level)
        .diag_f64("annulus_min", annulus_min)
        .diag("premise_form", "u >= t on the annulus B_r \\ B_{5r/6}(x0)"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::field::Constant;
    use crate::model::{Profile, Radial};
    use std::sync::Arc;

    fn disc(grid: &GeodesicBallGrid, s: f64) -> Vec<Point> {
        let idx: Vec<usize> = (0..grid.len()).filter(|&n| grid.node_radius(n) < s).collect();
        node_vertices(grid, &idx)
    }

    #[test]
    fn constant_field_contacts_at_vertices() {
        let m = ModelSpace::Euclidean;
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 32).unwrap());
        let u = ScalarField::sample(g.clone(), Arc::new(Constant(2.0)));
        let e = disc(&g, 0.5);
        let set = compute_contact_set(&u, 1.0, &e).unwrap();
        assert_eq!(set.pairs.len(), e.len());
        for p in &set.pairs {
            assert_eq!(p.x, p.y);
            assert_eq!(gradient_contact_residual(p, &u).unwrap(), 0.0);
        }
        assert!(set.covers_all_vertices());
    }

    #[test]
    fn quadratic_contact_map_shrinks() {
        let m = ModelSpace::Euclidean;
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 64).unwrap());
        let b = 1.0;
        let u = ScalarField::sample(g.clone(), Arc::new(Radial::new(m.origin(), Profile::Quadratic { b })));
        let e = disc(&g, 0.5);
        let set = compute_contact_set(&u, 1.0, &e).unwrap();
        let h = g.d_rho;
        for p in &set.pairs {
            let want = p.y.0 * (1.0 / (1.0 + b));
            assert!((p.x.0 - want).norm() < 2.0 * h);
        }
    }

    #[test]
    fn cone_contacts_on_unit_circle() {
        let m = ModelSpace::Euclidean;
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.5, 96).unwrap());
        let u = ScalarField::sample(g.clone(), Arc::new(Radial::new(m.origin(), Profile::Cone { slope: -1.0 })));
        let set = compute_contact_set(&u, 1.0, &[m.origin()]).unwrap();
        assert!(!set.pairs.is_empty());
        for p in &set.pairs {
            assert!((g.node_radius(p.node) - 1.0).abs() <= g.d_rho);
        }
    }

    #[test]
    fn empty_vertex_set_is_an_error() {
        let m = ModelSpace::Euclidean;
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 16).unwrap());
        let u = ScalarField::sample(g, Arc::new(Constant(0.0)));
        assert!(matches!(compute_contact_set(&u, 1.0, &[]), Err(LabError::EmptyVertexSet)));
        assert!(compute_contact_set(&u, 0.0, &[m.origin()]).is_err());
    }
}
