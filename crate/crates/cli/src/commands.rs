use crate::error::CliError;
use crate::output::{emit_table, num};
use crate::params::{ModelKind, Params};
use abplab::abp::{abp_check_with, vertex_disc, AbpInstance};
use abplab::barrier::{check_ricci_comparison, verify_barrier, BarrierSpec};
use abplab::contact::{compute_contact_set_with, gradient_contact_residual, node_vertices};
use abplab::harnack::{growth_check_with, harnack_check_full, harnack_check_sub, harnack_check_sup, GrowthInstance, Operator};
use abplab::hfun::{expansion_fit, hfun_numeric_with, functional_curvature, symmetric_samples, HfunResult};
use abplab::model::field::{random_smooth_field, Constant, Field};
use abplab::model::{Profile, Radial};
use abplab::suite::{self, Series, SuiteConfig, SuiteOutput};
use abplab::{build_ledger, verify_ledger, CheckReport, EffDim, GeodesicBallGrid, ModelSpace, ScalarField, SeededRng};
use clap::{Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use std::path::PathBuf;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Sup,
    Sub,
    Full,
    Growth,
    Pucci,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UKind {
    /// `(b/2) |x|^2`, an equality case on the plane.
    Quadratic,
    /// The constant 0.3, an equality case on the plane.
    Constant,
    /// Seeded random smooth fields.
    #[default]
    Random,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Constants ledger for (K, N, R), or the full grid when none is given.
    Constants,
    /// Contact set of a seeded smooth field over the vertex disc B_{r/3}.
    Contact,
    /// Measure estimate on one field family.
    AbpCheck {
        #[arg(long, value_enum, default_value = "random")]
        u: UKind,
        /// Quadratic coefficient.
        #[arg(long, default_value_t = 1.0)]
        b: f64,
    },
    /// Barrier lemma items and the distance Laplacian comparison.
    BarrierCheck {
        /// Barrier exponent. Defaults to the one fixed by (K, N, R).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Doubling, Vitali and distribution checks.
    Doubling,
    /// One Harnack inequality on a solver or manufactured instance, or the
    /// whole suite without --theorem.
    HarnackCheck {
        #[arg(long, value_enum)]
        theorem: Option<Theorem>,
        /// Ellipticity ratio for the Pucci operator.
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        /// Exponent for the sub-solution inequality. Defaults to just above p0.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Harnack functional at given radii, a sweep, or an expansion fit.
    Hfun {
        /// Radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        d: Vec<f64>,
        /// Fit the small-d expansion to numeric values.
        #[arg(long)]
        fit: bool,
        #[arg(long)]
        dmax: Option<f64>,
        #[arg(long, default_value_t = 3)]
        degree: usize,
    },
    /// Pucci operator identities and bounds.
    Pucci,
    /// Every suite.
    All,
    /// Runs the experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Extra files beside the report.
pub type Table = (String, Vec<u8>);

pub struct Outcome {
    pub outputs: Vec<SuiteOutput>,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn single(out: SuiteOutput) -> Self {
        Outcome { outputs: vec![out], tables: Vec::new() }
    }

    fn with_table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }
}

fn suite_config(p: &Params) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::new(p.seed());
    cfg.samples = p.samples;
    cfg.resolution = p.resolution;
    cfg.model = p.model()?;
    Ok(cfg)
}

fn named(name: &str, mut out: SuiteOutput) -> SuiteOutput {
    out.suite = name.into();
    out
}

fn output(name: &str, p: &Params, reports: Vec<CheckReport>) -> SuiteOutput {
    SuiteOutput::new(name, &SuiteConfig::new(p.seed()), reports)
}

/// Default ball radius: small enough for the sphere reach condition.
fn default_radius(m: &ModelSpace) -> f64 {
    match m {
        ModelSpace::Sphere { k } => 0.5 / k.sqrt(),
        _ => 1.0,
    }
}

pub fn execute(cmd: &Command, p: &Params) -> Result<Outcome, CliError> {
    match cmd {
        Command::Constants => constants(p),
        Command::Contact => contact(p),
        Command::AbpCheck { u, b } => abp(p, *u, *b),
        Command::BarrierCheck { alpha } => barrier(p, *alpha),
        Command::Doubling => Ok(Outcome::single(named("doubling", suite::measure(&suite_config(p)?)?))),
        Command::HarnackCheck { theorem: None, .. } => Ok(Outcome::single(suite::harnack(&suite_config(p)?)?)),
        Command::HarnackCheck { theorem: Some(t), theta, p: exp } => harnack(p, *t, *theta, *exp),
        Command::Hfun { d, fit, dmax, degree } => hfun(p, d, *fit, *dmax, *degree),
        Command::Pucci => Ok(Outcome::single(suite::pucci(&suite_config(p)?)?)),
        Command::All => {
            let cfg = suite_config(p)?;
            let outputs = suite::SUITES.iter().map(|s| suite::run(s, &cfg)).collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome { outputs, tables: Vec::new() })
        }
        Command::Run { .. } => Err(CliError::Config("nested run".into())),
    }
}

fn constants(p: &Params) -> Result<Outcome, CliError> {
    if p.big_k.is_none() && p.n.is_none() && p.big_r.is_none() {
        return Ok(Outcome::single(suite::constants(&SuiteConfig::new(p.seed()))?));
    }
    let params = abplab::CurvatureParams::new(p.big_k.unwrap_or(0.0), p.n.unwrap_or(EffDim::Finite(2.0)), p.big_r.unwrap_or(1.0))?;
    let l = build_ledger(params)?;
    let reports = verify_ledger(&l)?;
    Ok(Outcome::single(output("constants", p, reports).with_data(serde_json::to_value(&l)?)))
}

fn coords(p: &abplab::Point) -> [String; 3] {
    [0, 1, 2].map(|i| num(p.0[i]))
}

fn contact(p: &Params) -> Result<Outcome, CliError> {
    let m = p.model_or(ModelKind::Euclidean, 1.0)?;
    let r = p.r.unwrap_or(default_radius(&m));
    let a = p.a.unwrap_or(1.0);
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, p.resolution.unwrap_or(64))?);
    let mut rng = SeededRng::new(p.seed());
    let u = ScalarField::sample(g.clone(), Arc::new(random_smooth_field(&m, &m.origin(), r, 1.0, &mut rng)));
    let vertices = node_vertices(&g, &vertex_disc(&u, &m.origin(), r / 3.0));
    let set = compute_contact_set_with(&u, a, &vertices, Default::default())?;
    let mut rows = Vec::with_capacity(set.pairs.len());
    let mut worst = 0.0f64;
    for pair in &set.pairs {
        let res = gradient_contact_residual(pair, &u)?;
        worst = worst.max(res);
        let mut row: Vec<String> = coords(&pair.y).into();
        row.extend(coords(&pair.x));
        row.push(num(pair.min_value));
        row.push(num(res));
        rows.push(row);
    }
    let uncovered = vertices.len() - {
        let mut seen: Vec<usize> = set.pairs.iter().map(|q| q.vertex).collect();
        seen.dedup();
        seen.len()
    };
    let anchor = "contact set";
    let reports = vec![
        CheckReport::identity("contact.vertex_coverage", anchor, uncovered as f64, 0.0).diag("vertices", vertices.len()),
        CheckReport::inequality("contact.interior", anchor, set.boundary_touches as f64, 0.0)
            .diag("pairs", set.pairs.len())
            .diag("contact_nodes", set.contact_nodes().len())
            .diag_f64("max_gradient_residual", worst)
            .diag_f64("grid_spacing", g.d_rho),
    ];
    let header = ["y0", "y1", "y2", "x0", "x1", "x2", "min_value", "residual"];
    Ok(Outcome::single(output("contact", p, reports)).with_table(("contact_pairs.csv".into(), emit_table(&header, &rows)?)))
}

fn abp(p: &Params, kind: UKind, b: f64) -> Result<Outcome, CliError> {
    let m = p.model_or(ModelKind::Euclidean, 1.0)?;
    let r = p.r.unwrap_or(default_radius(&m));
    let a = p.a.unwrap_or(1.0);
    let n = p.dim_for(&m);
    let k = p.curvature_for(&m, r, r)?.k;
    let mut reports = Vec::new();
    match kind {
        UKind::Quadratic | UKind::Constant => {
            let res = p.resolution.unwrap_or(256);
            let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, res)?);
            let f: Arc<dyn Field> = match kind {
                UKind::Quadratic => Arc::new(Radial::new(m.origin(), Profile::Quadratic { b })),
                _ => Arc::new(Constant(0.3)),
            };
            let u = ScalarField::sample(g, f);
            // ring-aligned disc: 15/32 of the radius
            let e = AbpInstance::disc_nodes(&u, 0.46875 * r);
            let rep = abp_check_with(&AbpInstance::new(u, a, k, n, e)?, Default::default())?;
            if m == ModelSpace::Euclidean && rep.premise_violated.is_none() {
                let gap = rep.diagnostics["relative_gap"].as_f64().unwrap_or(f64::NAN).abs();
                reports.push(CheckReport::identity("abp.equality", "equality in the measure estimate", gap, 1e-3).diag("resolution", res));
            }
            reports.insert(0, rep);
        }
        UKind::Random => {
            let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, p.resolution.unwrap_or(64))?);
            for s in 0..p.samples.unwrap_or(10) {
                let mut rng = SeededRng::fork(p.seed(), s as u64);
                let u = ScalarField::sample(g.clone(), Arc::new(random_smooth_field(&m, &m.origin(), r, 1.0, &mut rng)));
                let rep = abp_check_with(&AbpInstance::disc(u, a, k, n, m.origin(), r / 3.0)?, Default::default())?;
                reports.push(rep.diag("sample", s));
            }
        }
    }
    Ok(Outcome::single(output("abp_check", p, reports).with_data(json!({ "model": m, "K": k, "N": n.to_string(), "r": r, "a": a }))))
}

fn barrier(p: &Params, alpha: Option<f64>) -> Result<Outcome, CliError> {
    let m = p.model_or(ModelKind::Euclidean, 1.0)?;
    let big_r = p.big_r.unwrap_or(1.0);
    let r = p.r.unwrap_or(big_r.min(0.9 * m.domain_radius()));
    let params = p.curvature_for(&m, big_r, r)?;
    let spec = match alpha {
        Some(al) => BarrierSpec::new(al, m, m.origin(), r)?,
        None => BarrierSpec::from_params(&params, m, m.origin(), r)?,
    };
    let worst = spec.junction_residuals().into_iter().fold(0.0, f64::max);
    let mut reports = vec![CheckReport::identity("barrier.junction_c2", "C2 junction", worst, 1e-8)];
    reports.extend(verify_barrier(&spec, &params)?);
    reports.extend(check_ricci_comparison(&m, &params, &m.origin(), r.min(0.5 * m.domain_radius()))?);
    let profile = (1..=400).map(|i| i as f64 / 400.0).map(|t| [t, spec.h(t)]).collect();
    let mut out = output("barrier_check", p, reports).with_data(serde_json::to_value(spec)?);
    out.series.push(Series::new("profile", "rho / r", "h", profile));
    Ok(Outcome::single(out))
}

fn harnack(p: &Params, theorem: Theorem, theta: f64, exp: Option<f64>) -> Result<Outcome, CliError> {
    let m = p.model_or(ModelKind::Euclidean, 1.0)?;
    let big_r = p.big_r.unwrap_or(0.5);
    let res = p.resolution.unwrap_or(64);
    let params = p.curvature_for(&m, big_r, 2.0 * big_r)?;
    let l = build_ledger(params)?;
    let seed = p.seed();
    let reports = match theorem {
        Theorem::Sup | Theorem::Full => {
            let (u, f) = suite::solver_instance(m, big_r, res, seed, -1.0)?;
            vec![if theorem == Theorem::Sup { harnack_check_sup(&u, &f, &l)? } else { harnack_check_full(&u, &f, &l)? }]
        }
        Theorem::Sub => {
            let (u, f) = suite::solver_instance(m, big_r, res, seed, 1.0)?;
            vec![harnack_check_sub(&u, &f, &l, exp.unwrap_or(l.p0 * (1.0 + 1e-9)))?]
        }
        Theorem::Growth | Theorem::Pucci => {
            let r = p.r.unwrap_or(big_r);
            let zero: Arc<dyn Field> = Arc::new(Constant(0.0));
            let mut inst = GrowthInstance::new(m, m.origin(), r, suite::well(m, r), zero).with_resolution(res);
            if theorem == Theorem::Pucci {
                inst = inst.with_operator(Operator::PucciMinus(theta));
            }
            growth_check_with(&inst, &l, Default::default())?
        }
    };
    let rows: Vec<Vec<String>> =
        reports.iter().map(|r| vec![r.name.clone(), num(r.lhs), num(r.rhs), num(r.slack())]).collect();
    let table = emit_table(&["quantity", "lhs", "rhs", "slack"], &rows)?;
    let out = output("harnack_check", p, reports).with_data(serde_json::to_value(&l)?);
    Ok(Outcome::single(out).with_table(("harnack_quantities.csv".into(), table)))
}

fn hfun(p: &Params, ds: &[f64], fit: bool, dmax: Option<f64>, degree: usize) -> Result<Outcome, CliError> {
    let m = p.model_or(ModelKind::Sphere, 2.0)?;
    let root = m.curvature().abs().sqrt();
    let res = p.resolution.unwrap_or(128);
    let exec = Default::default();
    let mut reports = Vec::new();
    let mut results: Vec<HfunResult> = Vec::new();
    let sweep: Vec<f64> = if !ds.is_empty() {
        ds.to_vec()
    } else if fit {
        Vec::new()
    } else {
        let top = dmax.unwrap_or(if root > 0.0 { 1.8 / root } else { 1.0 });
        let n = p.samples.unwrap_or(12);
        (1..=n).map(|i| top * i as f64 / n as f64).collect()
    };
    for &d in &sweep {
        let r = hfun_numeric_with(&m, d, res, res, exec)?;
        let rel = (r.value_numeric - r.value_closed).abs() / r.value_closed;
        reports.push(
            CheckReport::identity("hfun.closed_form", "closed form of the Harnack functional", rel, 1e-3)
                .diag_f64("d", d)
                .diag_f64("numeric", r.value_numeric)
                .diag_f64("closed", r.value_closed),
        );
        results.push(r);
    }
    let mut fitted = None;
    if fit {
        let k = functional_curvature(&m).abs();
        let top = dmax.unwrap_or(if k > 0.0 { 0.1 / k.sqrt() } else { 0.1 });
        let samples = symmetric_samples(top, p.samples.unwrap_or(12));
        let vals = samples.iter().map(|d| Ok(hfun_numeric_with(&m, d.abs(), res, res, exec)?.value_numeric)).collect::<Result<Vec<_>, CliError>>()?;
        let f = expansion_fit(&samples, &vals, degree)?;
        let anchor = "expansion 9 - 3Kd^2 + 3/8 K^2 d^4";
        let sign = if m.curvature() > 0.0 { -1.0 } else { 1.0 };
        reports.push(CheckReport::identity("hfun.a0", anchor, (f.a(0) - 9.0).abs(), 1e-3));
        reports.push(CheckReport::identity("hfun.a1", anchor, f.a(1).abs(), 1e-6));
        if degree >= 2 {
            let want = sign * 3.0 * k;
            reports.push(CheckReport::identity("hfun.a2", anchor, (f.a(2) - want).abs(), (0.01 * want.abs()).max(1e-3)).diag_f64("a2", f.a(2)));
        }
        fitted = Some(f);
    }
    let rows: Vec<Vec<String>> = results.iter().map(|r| vec![num(r.d), num(r.value_closed), num(r.value_numeric)]).collect();
    let mut out = output("hfun", p, reports).with_data(json!({ "results": results, "fit": fitted }));
    if !results.is_empty() {
        out.series.push(Series::new("numeric", "d", "H", results.iter().map(|r| [r.d, r.value_numeric]).collect()));
        out.series.push(Series::new("closed", "d", "H", results.iter().map(|r| [r.d, r.value_closed]).collect()));
    }
    let mut outcome = Outcome::single(out);
    if !rows.is_empty() {
        outcome = outcome.with_table(("hfun.csv".into(), emit_table(&["d", "closed", "numeric"], &rows)?));
    }
    Ok(outcome)
}
