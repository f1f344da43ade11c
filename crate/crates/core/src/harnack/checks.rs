//! Harnack inequalities for sub/super/solutions on `B_{2R}`.
//!
//! Constants are astronomically large, so every comparison is made on
//! logarithms: `lhs = ln(left side)`, `rhs = ln C + ln(bracket)`.

use crate::constants::ConstantsLedger;
use crate::error::{LabError, Result};
use crate::measure::integral_i;
use crate::model::ScalarField;
use crate::report::CheckReport;

/// Tolerance on nodewise differential inequalities, relative to the field scale.
pub const LAPLACIAN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `Delta_nu u <= f`
    Super,
    /// `Delta_nu u >= f`
    Sub,
    /// `Delta_nu u = f`
    Equal,
}

/// Nodes strictly inside the concentric ball of radius `s`.
pub fn sub_ball(u: &ScalarField, s: f64) -> Vec<usize> {
    let g = &u.grid;
    (0..g.len()).filter(|&i| g.node_radius(i) < s).collect()
}

/// `ln (avg v^p)^{1/p}` over `idx`, for `v >= 0` and any `p > 0` given by
/// `ln p`; small `p` uses the second-order expansion about the geometric mean.
pub fn ln_power_mean(values: &[f64], weights: &[f64], idx: &[usize], ln_p: f64) -> f64 {
    let total: f64 = idx.iter().map(|&i| weights[i]).sum();
    let zero: f64 = idx.iter().filter(|&&i| values[i] <= 0.0).map(|&i| weights[i]).sum();
    let pos: Vec<usize> = idx.iter().copied().filter(|&i| values[i] > 0.0).collect();
    if pos.is_empty() {
        return f64::NEG_INFINITY;
    }
    let p = ln_p.exp();
    let wpos = total - zero;
    let zero_part = if zero > 0.0 { (wpos / total).ln() / p } else { 0.0 };
    let logs: Vec<f64> = pos.iter().map(|&i| values[i].ln()).collect();
    let mean_log = pos.iter().zip(&logs).map(|(&i, l)| weights[i] * l).sum::<f64>() / wpos;
    let spread = logs.iter().fold(0.0f64, |m, l| m.max((l - mean_log).abs()));
    let pos_part = if p * spread < 1e-8 {
        let var = pos.iter().zip(&logs).map(|(&i, l)| weights[i] * (l - mean_log).powi(2)).sum::<f64>() / wpos;
        mean_log + 0.5 * p * var
    } else {
        // avg exp(p (l - mean_log)) then log, shifted for stability
        let m1 = pos.iter().zip(&logs).map(|(&i, l)| weights[i] * (p * (l - mean_log)).exp_m1()).sum::<f64>() / wpos;
        mean_log + m1.ln_1p() / p
    };
    zero_part + pos_part
}

/// `R^2 (avg_{B_2R} |f|^{N eta})^{1/(N eta)}`.
pub fn forcing_term(f: &ScalarField, l: &ConstantsLedger) -> Result<f64> {
    Ok(integral_i(f, l.n(), l.eta)? / 4.0)
}

fn grids_match(u: &ScalarField, f: &ScalarField, l: &ConstantsLedger) -> Result<()> {
    if !std::sync::Arc::ptr_eq(&u.grid, &f.grid) && (u.grid.len() != f.grid.len() || u.grid.radius != f.grid.radius) {
        return Err(LabError::InvalidParam("u and f must share a grid".into()));
    }
    let two_r = 2.0 * l.params.r;
    if (u.grid.radius - two_r).abs() > 1e-12 * two_r {
        return Err(LabError::InvalidParam(format!("grid radius {} is not 2R = {two_r}", u.grid.radius)));
    }
    Ok(())
}

/// Worst violation of the relation, scaled: positive means violated.
pub fn relation_defect(u: &ScalarField, f: &ScalarField, rel: Relation) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    let mut scale = 1.0f64;
    let mut diffs = Vec::with_capacity(u.grid.len());
    for i in 0..u.grid.len() {
        let lap = u.laplacian_nu_at(i)?;
        scale = scale.max(lap.abs()).max(f.values[i].abs());
        diffs.push(lap - f.values[i]);
    }
    for d in diffs {
        let v = match rel {
            Relation::Super => d,
            Relation::Sub => -d,
            Relation::Equal => d.abs(),
        };
        worst = worst.max(v);
    }
    Ok(worst / scale)
}

fn premises(u: &ScalarField, f: &ScalarField, l: &ConstantsLedger, rel: Relation, nonneg: bool) -> Result<Option<(String, f64)>> {
    grids_match(u, f, l)?;
    let g = &u.grid;
    let ric = g.model.ricci_lower_bound(l.params.n, &g.center, g.radius)?;
    if ric < -l.params.k * (1.0 + 1e-12) - 1e-12 {
        return Ok(Some(("Ric_{N,nu} >= -K g on B_{2R}".into(), ric)));
    }
    if nonneg {
        let min = u.values.iter().chain(u.boundary.iter().flatten()).fold(f64::INFINITY, |m, v| m.min(*v));
        if min < 0.0 {
            return Ok(Some(("u >= 0 in B_{2R}".into(), min)));
        }
    }
    let defect = relation_defect(u, f, rel)?;
    if defect > LAPLACIAN_TOL {
        let p = match rel {
            Relation::Super => "Delta_nu u <= f in B_{2R}",
            Relation::Sub => "Delta_nu u >= f in B_{2R}",
            Relation::Equal => "Delta_nu u = f in B_{2R}",
        };
        return Ok(Some((p.into(), defect)));
    }
    Ok(None)
}

fn premise_report(name: &str, anchor: &str, p: (String, f64)) -> CheckReport {
    CheckReport::premise_failure(name, anchor, p.0).diag_f64("premise_value", p.1).non_sharp()
}

/// `ln(x)`, with `ln C + ln 0 = -inf` even when `ln C = inf`.
fn ln_product(ln_c: f64, x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_c + x.ln()
    }
}

/// `(avg_{B_{R/2}} u^{p0})^{1/p0} <= C0 (inf_{B_{R/2}} u + forcing)` for
/// nonnegative supersolutions.
pub fn harnack_check_sup(u: &ScalarField, f: &ScalarField, l: &ConstantsLedger) -> Result<CheckReport> {
    let (name, anchor) = ("harnack.sup", "sup inequality");
    if let Some(p) = premises(u, f, l, Relation::Super, true)? {
        return Ok(premise_report(name, anchor, p));
    }
    let half = sub_ball(u, 0.5 * l.params.r);
    let lhs = ln_power_mean(&u.values, &u.grid.weights, &half, l.ln_p0);
    let inf = half.iter().map(|&i| u.values[i]).fold(f64::INFINITY, f64::min);
    let forcing = forcing_term(f, l)?;
    let rhs = ln_product(l.ln_c0, inf + forcing);
    Ok(CheckReport::inequality(name, anchor, lhs, rhs)
        .tol(0.0, 1e-12)
        .diag("scale", "log")
        .diag_f64("inf_half", inf)
        .diag_f64("forcing", forcing)
        .diag_f64("ln_c0", l.ln_c0)
        .non_sharp())
}

/// `sup_{B_{R/2}} u <= C1(p) ((avg_{B_R} (u+)^p)^{1/p} + forcing)` for
/// subsolutions and `p >= p0`, with `C1(p) = C1(p0)`.
pub fn harnack_check_sub(u: &ScalarField, f: &ScalarField, l: &ConstantsLedger, p: f64) -> Result<CheckReport> {
    let (name, anchor) = ("harnack.sub", "sub inequality");
    if !(p > 0.0) {
        return Err(LabError::InvalidParam(format!("p = {p} must be positive")));
    }
    if p.ln() < l.ln_p0 {
        return Ok(CheckReport::premise_failure(name, anchor, "p >= p0")
            .diag("unsupported", "C1(p) for p < p0 has no explicit form")
            .diag_f64("ln_p0", l.ln_p0)
            .non_sharp());
    }
    if let Some(pr) = premises(u, f, l, Relation::Sub, false)? {
        return Ok(premise_report(name, anchor, pr));
    }
    let half = sub_ball(u, 0.5 * l.params.r);
    let full = sub_ball(u, l.params.r);
    let sup = half.iter().map(|&i| u.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let plus: Vec<f64> = u.values.iter().map(|v| v.max(0.0)).collect();
    let mean = ln_power_mean(&plus, &u.grid.weights, &full, p.ln()).exp();
    let forcing = forcing_term(f, l)?;
    let lhs = if sup > 0.0 { sup.ln() } else { f64::NEG_INFINITY };
    let rhs = ln_product(l.ln_c2(), mean + forcing);
    Ok(CheckReport::inequality(name, anchor, lhs, rhs)
        .tol(0.0, 1e-12)
        .diag("scale", "log")
        .diag_f64("sup_half", sup)
        .diag_f64("lp_mean", mean)
        .diag_f64("forcing", forcing)
        .non_sharp())
}

/// `sup_{B_{R/2}} u <= C2 (inf_{B_{R/2}} u + forcing)` for nonnegative solutions.
pub fn harnack_check_full(u: &ScalarField, f: &ScalarField, l: &ConstantsLedger) -> Result<CheckReport> {
    let (name, anchor) = ("harnack.full", "soln inequality");
    if let Some(p) = premises(u, f, l, Relation::Equal, true)? {
        return Ok(premise_report(name, anchor, p));
    }
    let half = sub_ball(u, 0.5 * l.params.r);
    let sup = half.iter().map(|&i| u.values[i]).fold(f64::NEG_INFINITY, f64::max);
    let inf = half.iter().map(|&i| u.values[i]).fold(f64::INFINITY, f64::min);
    let forcing = forcing_term(f, l)?;
    let lhs = if sup > 0.0 { sup.ln() } else { f64::NEG_INFINITY };
    let rhs = ln_product(l.ln_c2(), inf + forcing);
    Ok(CheckReport::inequality(name, anchor, lhs, rhs)
        .tol(0.0, 1e-12)
        .diag("scale", "log")
        .diag_f64("sup_half", sup)
        .diag_f64("inf_half", inf)
        .diag_f64("ratio", sup / inf)
        .diag_f64("forcing", forcing)
        .non_sharp())
}
