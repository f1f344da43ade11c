//! Doubling bounds, the normalized integral `I_{K,N}`, distribution sums and
//! Vitali covers.

use crate::constants::{doubling, eta, CurvatureParams};
use crate::error::{LabError, Result};
use crate::exec::Exec;
use crate::model::grid::{ball_measure, MeasureMethod};
use crate::model::{ModelSpace, Point, ScalarField};
use crate::report::CheckReport;
use crate::rng::SeededRng;

/// Sampled radii for the `B_{2r}` against `B_r` check.
const DOUBLING_SAMPLES: usize = 16;
/// Cap on the distribution sum index.
pub const MAX_TERMS: usize = 10_000;

fn method_name(m: MeasureMethod) -> &'static str {
    match m {
        MeasureMethod::ClosedForm => "closed_form",
        MeasureMethod::Quadrature => "quadrature",
    }
}

/// `Ric_{N,nu} >= -K` on `B_R(center)`, within the cut radius.
fn ricci_premise(m: &ModelSpace, params: &CurvatureParams, center: &Point) -> Result<Option<f64>> {
    if params.r >= m.domain_radius() {
        return Err(LabError::CutRadius { norm: params.r, cut: m.domain_radius() });
    }
    let ric = m.ricci_lower_bound(params.n, center, params.r)?;
    Ok((ric < -params.k * (1.0 + 1e-12) - 1e-12).then_some(ric))
}

/// Doubling estimate `nu[B_r1] / nu[B_r2] <= D (r1/r2)^{N eta}` for
/// `r2 < r1 <= R`, the one-step bound `nu[B_2r] / nu[B_r] <= D` on sampled
/// `r <= R/2`, the same ratios against `2^N cosh(2 sqrt(K/(N-1)) R)^{N-1}`,
/// and that bound against `D_{K,N,R}`.
pub fn doubling_check(m: &ModelSpace, params: &CurvatureParams, center: &Point, r1: f64, r2: f64) -> Result<Vec<CheckReport>> {
    let n = params.n.finite()?;
    let (k, big_r) = (params.k, params.r);
    m.check_point(center)?;
    if !(0.0 < r2 && r2 < r1 && r1 <= big_r) {
        return Err(LabError::InvalidParam(format!("need 0 < r2 < r1 <= R, got r1 = {r1}, r2 = {r2}, R = {big_r}")));
    }
    let anchor = "doubling estimate";
    let names = ["measure.doubling_estimate", "measure.doubling_step", "measure.doubling_cosh", "measure.doubling_constant"];
    if let Some(ric) = ricci_premise(m, params, center)? {
        return Ok(names
            .iter()
            .map(|nm| CheckReport::premise_failure(*nm, anchor, "Ric_{N,nu} >= -K g on B_R").diag_f64("ricci_lower_bound", ric))
            .collect());
    }
    let d = doubling(k, n, big_r);
    let e = eta(k, n, big_r);
    let (b1, b2) = (ball_measure(m, center, r1)?, ball_measure(m, center, r2)?);
    let ratio = b1.value / b2.value;
    let bound = d * (r1 / r2).powf(n * e);
    let mut out = vec![CheckReport::inequality(names[0], anchor, ratio, bound)
        .tol(1e-12, 0.0)
        .diag("measure_method", method_name(b1.method).to_string() + "/" + method_name(b2.method))
        .diag_f64("eta", e)];

    let mut worst = 0.0f64;
    let mut worst_r = 0.0;
    for i in 1..=DOUBLING_SAMPLES {
        let r = 0.5 * big_r * i as f64 / DOUBLING_SAMPLES as f64;
        let q = ball_measure(m, center, 2.0 * r)?.value / ball_measure(m, center, r)?.value;
        if q > worst {
            worst = q;
            worst_r = r;
        }
    }
    out.push(CheckReport::inequality(names[1], anchor, worst, d).tol(1e-12, 0.0).diag_f64("worst_r", worst_r));

    let cosh_bound = if k > 0.0 && n > 1.0 {
        2f64.powf(n) * (2.0 * (k / (n - 1.0)).sqrt() * big_r).cosh().powf(n - 1.0)
    } else {
        2f64.powf(n)
    };
    out.push(CheckReport::inequality(names[2], "doubling finite", worst, cosh_bound).tol(1e-12, 0.0));
    out.push(CheckReport::inequality(names[3], "doubling finite", cosh_bound, d).tol(1e-15, 0.0));
    Ok(out)
}

/// `I_{K,N}(f, B_r, q) = r^2 (avg_{B_r} |f|^{Nq})^{1/(Nq)}` on the grid ball.
pub fn integral_i(f: &ScalarField, n: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0) || !(n > 1.0 && n.is_finite()) {
        return Err(LabError::InvalidParam(format!("need q >= 1 and 1 < N < inf, got q = {q}, N = {n}")));
    }
    let g = &f.grid;
    let r = g.radius;
    let top = f.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if top == 0.0 {
        return Ok(0.0);
    }
    let p = n * q;
    let mut num = 0.0;
    for (v, w) in f.values.iter().zip(&g.weights) {
        num += (v.abs() / top).powf(p) * w;
    }
    Ok(r * r * top * (num / g.total_measure()).powf(1.0 / p))
}

/// Outcome of the distribution bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSum {
    pub s: f64,
    pub lambda_one: f64,
    pub terms: usize,
    pub mean_fp: f64,
}

/// `lambda(t) = nu[{f > t}] / nu[Omega]` from sorted samples.
struct UpperTail {
    sorted: Vec<f64>,
    suffix: Vec<f64>,
    total: f64,
}

impl UpperTail {
    fn new(values: &[f64], weights: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let mut suffix = vec![0.0; idx.len() + 1];
        for (pos, &i) in idx.iter().enumerate().rev() {
            suffix[pos] = suffix[pos + 1] + weights[i];
        }
        let total = suffix[0];
        UpperTail { sorted, suffix, total }
    }

    fn at(&self, t: f64) -> f64 {
        let pos = self.sorted.partition_point(|&v| v <= t);
        self.suffix[pos] / self.total
    }
}

/// `S = sum_k C^{pk} lambda(C^k)` with the upper-tail distribution, summed
/// until a term drops below `1e-15 S` or the level exceeds `max f`.
pub fn distribution_sum(values: &[f64], weights: &[f64], c: f64, p: f64) -> Result<DistributionSum> {
    if values.len() != weights.len() || values.is_empty() {
        return Err(LabError::InvalidParam("values and weights must be nonempty and of equal length".into()));
    }
    if !(c > 1.0) || !(p > 0.0) {
        return Err(LabError::InvalidParam(format!("need C > 1 and p > 0, got C = {c}, p = {p}")));
    }
    if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(LabError::InvalidParam("f must be finite and nonnegative, weights nonnegative".into()));
    }
    let tail = UpperTail::new(values, weights);
    if !(tail.total > 0.0) {
        return Err(LabError::InvalidParam("total weight must be positive".into()));
    }
    let top = *tail.sorted.last().unwrap_or(&0.0);
    let mut s = 0.0;
    let mut terms = 0;
    loop {
        if terms >= MAX_TERMS {
            return Err(LabError::DivergentSeries { ratio: c.powf(p) });
        }
        let level = c.powi(terms as i32);
        let term = if level >= top { 0.0 } else { (p * terms as f64 * c.ln()).exp() * tail.at(level) };
        s += term;
        terms += 1;
        if level >= top || term < 1e-15 * s {
            break;
        }
    }
    let mean_fp = values.iter().zip(weights).map(|(v, w)| v.powf(p) * w).sum::<f64>() / tail.total;
    Ok(DistributionSum { s, lambda_one: tail.at(1.0), terms, mean_fp })
}

/// `(1 - C^-p) S + C^-p lambda(1) <= avg f^p <= 1 + (C^p - 1) S`.
pub fn lp_distribution_check(values: &[f64], weights: &[f64], c: f64, p: f64) -> Result<Vec<CheckReport>> {
    let anchor = "Lp";
    let ds = match distribution_sum(values, weights, c, p) {
        Ok(ds) => ds,
        Err(LabError::DivergentSeries { ratio }) => {
            let rep = |nm: &str| {
                CheckReport::inequality(nm, anchor, f64::INFINITY, 0.0).diag("divergent", true).diag_f64("ratio", ratio).diag("terms", MAX_TERMS)
            };
            return Ok(vec![rep("measure.lp_lower"), rep("measure.lp_upper")]);
        }
        Err(e) => return Err(e),
    };
    let cp = c.powf(p);
    let lower = (1.0 - 1.0 / cp) * ds.s + ds.lambda_one / cp;
    let upper = 1.0 + (cp - 1.0) * ds.s;
    let diag = |r: CheckReport| {
        r.tol(1e-12, 1e-15).diag_f64("S", ds.s).diag("terms", ds.terms).diag_f64("lambda_1", ds.lambda_one).diag("tail", "upper")
    };
    Ok(vec![
        diag(CheckReport::inequality("measure.lp_lower", anchor, lower, ds.mean_fp)),
        diag(CheckReport::inequality("measure.lp_upper", anchor, ds.mean_fp, upper)),
    ])
}

/// A finite family of geodesic balls.
#[derive(Debug, Clone)]
pub struct BallFamily {
    pub model: ModelSpace,
    pub balls: Vec<(Point, f64)>,
}

impl BallFamily {
    pub fn new(model: ModelSpace, balls: Vec<(Point, f64)>) -> Result<Self> {
        for (c, r) in &balls {
            model.check_point(c)?;
            if !(*r > 0.0 && r.is_finite()) {
                return Err(LabError::InvalidParam(format!("ball radius {r}")));
            }
        }
        Ok(BallFamily { model, balls })
    }

    /// `count` balls with centers uniform in `B_spread(center)` (Euclidean
    /// disc law in normal coordinates) and radii in `[r_min, r_max]`.
    pub fn random(model: ModelSpace, center: &Point, spread: f64, r_min: f64, r_max: f64, count: usize, rng: &mut SeededRng) -> Result<Self> {
        if spread + r_max >= model.domain_radius() {
            return Err(LabError::CutRadius { norm: spread + r_max, cut: model.domain_radius() });
        }
        let frame = model.frame(center);
        let balls = (0..count)
            .map(|_| {
                let (x, y) = rng.in_disc(spread);
                let c = model.polar_point(center, &frame, x.hypot(y), y.atan2(x));
                (c, rng.range(r_min, r_max))
            })
            .collect();
        Self::new(model, balls)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn max_radius(&self) -> f64 {
        self.balls.iter().map(|b| b.1).fold(0.0, f64::max)
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.model.dist(&self.balls[i].0, &self.balls[j].0)
    }

    fn quarters_disjoint(&self, i: usize, j: usize) -> bool {
        self.dist(i, j) >= 0.25 * (self.balls[i].1 + self.balls[j].1)
    }
}

/// Greedy selection by decreasing radius (ties by index): a ball is taken
/// iff its quarter ball misses every quarter ball taken so far.
pub fn vitali_cover(fam: &BallFamily) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fam.len()).collect();
    order.sort_by(|&a, &b| fam.balls[b].1.total_cmp(&fam.balls[a].1).then(a.cmp(&b)));
    let mut selected: Vec<usize> = Vec::new();
    for i in order {
        if selected.iter().all(|&s| fam.quarters_disjoint(i, s)) {
            selected.push(i);
        }
    }
    selected
}

/// Exhaustive checks of a selection: pairwise disjoint quarter balls, every
/// center covered by a selected ball, and for each unselected ball a
/// selected witness of no smaller radius whose quarter ball meets it.
pub fn verify_vitali(fam: &BallFamily, selected: &[usize], exec: Exec) -> Vec<CheckReport> {
    let anchor = "Vitali lemma";
    let overlaps: usize = exec
        .map(selected.len(), |a| (a + 1..selected.len()).filter(|&b| !fam.quarters_disjoint(selected[a], selected[b])).count())
        .into_iter()
        .sum();
    let mut is_sel = vec![false; fam.len()];
    for &s in selected {
        is_sel[s] = true;
    }
    let status = exec.map(fam.len(), |x| {
        let covered = selected.iter().any(|&s| fam.dist(x, s) < fam.balls[s].1);
        let witnessed = is_sel[x] || selected.iter().any(|&s| fam.balls[s].1 >= fam.balls[x].1 && !fam.quarters_disjoint(x, s));
        (covered, witnessed)
    });
    let uncovered = status.iter().filter(|s| !s.0).count();
    let unwitnessed = status.iter().filter(|s| !s.1).count();
    vec![
        CheckReport::identity("measure.vitali_disjoint", anchor, overlaps as f64, 0.0).diag("selected", selected.len()),
        CheckReport::identity("measure.vitali_coverage", anchor, uncovered as f64, 0.0).diag("family", fam.len()),
        CheckReport::identity("measure.vitali_witness", anchor, unwitnessed as f64, 0.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::EffDim;

    #[test]
    fn flat_doubling_is_exact() {
        let m = ModelSpace::Euclidean;
        let p = CurvatureParams::finite(0.0, 2.0, 1.0).unwrap();
        let reps = doubling_check(&m, &p, &m.origin(), 1.0, 0.5).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        assert!((reps[0].lhs - 4.0).abs() < 1e-14);
        assert!((reps[1].lhs - 4.0).abs() < 1e-14);
    }

    #[test]
    fn doubling_premise() {
        let m = ModelSpace::hyperbolic(1.0).unwrap();
        let p = CurvatureParams::new(0.0, EffDim::Finite(2.0), 1.0).unwrap();
        let reps = doubling_check(&m, &p, &m.origin(), 1.0, 0.5).unwrap();
        assert!(reps.iter().all(|r| r.premise_violated.is_some()));
    }

    #[test]
    fn two_level_distribution() {
        let c: f64 = 3.0;
        let reps = lp_distribution_check(&[1.0, c * c], &[0.5, 0.5], c, 1.0).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        assert!((reps[0].lhs - c / 2.0).abs() < 1e-14);
        assert!((reps[1].rhs - (1.0 + c * c) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_distribution() {
        let reps = lp_distribution_check(&[1.0; 4], &[0.25; 4], 2.0, 0.7).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        assert_eq!(reps[0].diagnostics["S"].as_f64(), Some(0.0));
    }

    #[test]
    fn small_vitali_families() {
        let m = ModelSpace::Euclidean;
        let one = BallFamily::new(m, vec![(m.origin(), 1.0)]).unwrap();
        assert_eq!(vitali_cover(&one), vec![0]);
        let two = BallFamily::new(m, vec![(m.origin(), 1.0), (m.origin(), 1.0)]).unwrap();
        let sel = vitali_cover(&two);
        assert_eq!(sel, vec![0]);
        assert!(verify_vitali(&two, &sel, Exec::Sequential).iter().all(|r| r.pass));
    }
}
