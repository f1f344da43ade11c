use super::{models, rejection, tagged, tally, Series, SuiteConfig, SuiteOutput};
use crate::abp::{abp_check_with, evaluate, AbpInstance};
use crate::constants::{build_ledger, ConstantsLedger, CurvatureParams, EffDim};
use crate::error::Result;
use crate::harnack::pucci::{e_theta_bounds, pucci as pucci_pair};
use crate::harnack::{
    growth_check_with, harnack_check_full, harnack_check_sub, harnack_check_sup, pucci_contact_bound, solve_poisson, DirichletProblem,
    GrowthInstance, Operator,
};
use crate::hfun::{expansion_fit, fit_closed_form, hfun_closed_form, hfun_numeric_with, functional_curvature, symmetric_samples};
use crate::model::field::{random_smooth_field, AmbientFn, Constant, Field, Sum};
use crate::model::{GeodesicBallGrid, ModelSpace, Profile, Radial, ScalarField};
use crate::report::CheckReport;
use crate::rng::SeededRng;
use nalgebra::{DMatrix, Vector3};
use serde_json::json;
use std::sync::Arc;

fn quadratic_instance(n: usize, a: f64, b: f64) -> Result<f64> {
    let m = ModelSpace::Euclidean;
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, n)?);
    let f: Arc<dyn Field> = if b == 0.0 { Arc::new(Constant(0.3)) } else { Arc::new(Radial::new(m.origin(), Profile::Quadratic { b })) };
    let u = ScalarField::sample(g, f);
    // ring-aligned disc: an exact count of cells at every even resolution
    let e = AbpInstance::disc_nodes(&u, 0.46875);
    let inst = AbpInstance::new(u, a, 0.0, EffDim::Finite(2.0), e)?;
    Ok(evaluate(&inst, crate::exec::Exec::default())?.relative_gap())
}

/// Flat equality cases `u = const` and `u = (b/2)|x|^2` at two resolutions.
pub fn abp_equality(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let fine = cfg.resolution_or(256);
    let coarse = fine / 2;
    let mut reports = Vec::new();
    let mut gaps = Vec::new();
    for b in [0.0, 0.5, 1.0, 2.0] {
        for a in [0.5, 1.0, 2.0] {
            let (ec, ef) = (quadratic_instance(coarse, a, b)?.abs(), quadratic_instance(fine, a, b)?.abs());
            let case = format!("a={a} b={b}");
            reports.push(tagged(
                CheckReport::identity("abp.equality", "equality in the measure estimate", ef, 1e-3)
                    .diag("resolution", fine)
                    .diag_f64("coarse_gap", ec),
                &case,
            ));
            reports.push(tagged(
                CheckReport::inequality("abp.refinement", "equality in the measure estimate", ef, (ec / 2.0).max(1e-12))
                    .diag("coarse_resolution", coarse),
                &case,
            ));
            if b == 1.0 {
                gaps.push([a, ef]);
            }
        }
    }
    Ok(SuiteOutput::new("abp_equality", cfg, reports).with_series(Series::new("gap_b1", "a", "relative gap", gaps)))
}

/// Seeded random smooth fields on the curved models.
pub fn abp_random(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let samples = cfg.samples_or(50);
    let res = cfg.resolution_or(64);
    let cases = vec![
        (ModelSpace::Sphere { k: 1.0 }, (None, EffDim::Finite(2.0), 0.5)),
        (ModelSpace::Hyperbolic { k: 1.0 }, (None, EffDim::Finite(2.0), 1.0)),
        (ModelSpace::GaussianPlane { lambda: 1.0 }, (Some(0.0), EffDim::Finite(4.0), 1.0)),
        (ModelSpace::GaussianPlane { lambda: 1.0 }, (Some(0.0), EffDim::Infinite, 1.0)),
        (ModelSpace::Euclidean, (None, EffDim::Finite(2.0), 1.0)),
    ];
    let cases = if cfg.model.is_some() { cfg.select(cases) } else { cases[..4].to_vec() };
    let mut reports = Vec::new();
    let mut gaps = Vec::new();
    for (ci, (m, (k, n, r))) in cases.into_iter().enumerate() {
        let k = match k {
            Some(k) => k,
            None => m.curvature_bound(n, &m.origin(), r)?,
        };
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, res)?);
        let mut reps = Vec::with_capacity(samples);
        for s in 0..samples {
            let mut rng = SeededRng::fork(cfg.seed, (ci * 1_000_000 + s) as u64);
            let f = random_smooth_field(&m, &m.origin(), r, 1.0, &mut rng);
            let u = ScalarField::sample(g.clone(), Arc::new(f));
            let inst = AbpInstance::disc(u, 1.0, k, n, m.origin(), r / 3.0)?;
            let rep = abp_check_with(&inst, cfg.exec)?;
            if ci == 0 {
                gaps.push([s as f64, rep.diagnostics["relative_gap"].as_f64().unwrap_or(f64::NAN)]);
            }
            reps.push(rep);
        }
        let case = format!("{} K={k} N={n} r={r}", m.name());
        reports.push(tagged(tally("abp.measure_estimate", "Measure Estimate Formula", &reps), &case));
    }
    Ok(SuiteOutput::new("abp_random", cfg, reports).with_series(Series::new("gap_first_case", "seed", "relative gap", gaps)))
}

fn ledger(k: f64, n: f64, r: f64) -> Result<ConstantsLedger> {
    build_ledger(CurvatureParams::finite(k, n, r)?)
}

fn on_grid(m: ModelSpace, radius: f64, res: usize, u: Arc<dyn Field>, f: Arc<dyn Field>) -> Result<(ScalarField, ScalarField)> {
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), radius, res)?);
    let us = ScalarField::sample(g.clone(), u);
    Ok((us, ScalarField::sample(g, f)))
}

fn shifted_quadratic(c: f64, b: f64) -> Arc<dyn Field> {
    let m = ModelSpace::Euclidean;
    Arc::new(Sum::new().with(1.0, Constant(c)).with(1.0, Radial::new(m.origin(), Profile::Quadratic { b })))
}

/// `u = 1.25 - rho^2 / r^2`, which has its minimum on the boundary of `B_r`.
pub fn well(m: ModelSpace, r: f64) -> Arc<dyn Field> {
    Arc::new(Sum::new().with(1.0, Constant(1.25)).with(1.0, Radial::new(m.origin(), Profile::Quadratic { b: -2.0 / (r * r) })))
}

/// Solves `Delta_nu u = sign (1/2 + s^2)` on `B_{2R}` with seeded `s` and
/// positive boundary data.
pub fn solver_instance(m: ModelSpace, big_r: f64, res: usize, seed: u64, sign: f64) -> Result<(ScalarField, ScalarField)> {
    let mut rng = SeededRng::new(seed);
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 2.0 * big_r, res)?);
    let s = random_smooth_field(&m, &m.origin(), 2.0 * big_r, 1.0, &mut rng);
    let fv: Vec<f64> = g.nodes.iter().map(|p| sign * (0.5 + s.value(&m, p).powi(2))).collect();
    let gv: Vec<f64> = g.boundary_points().iter().map(|p| 1.0 + 0.5 * s.value(&m, p).tanh()).collect();
    let sol = solve_poisson(&DirichletProblem::new(g.clone(), fv.clone(), gv)?)?;
    Ok((sol.u, ScalarField::from_values(g, fv, None)?))
}

/// Manufactured and solver instances of the three Harnack inequalities,
/// rejected instances, and the growth pipeline.
pub fn harnack(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let res = cfg.resolution_or(64);
    let samples = cfg.samples_or(3);
    let e = ModelSpace::Euclidean;
    let h = ModelSpace::Hyperbolic { k: 1.0 };
    let zero: Arc<dyn Field> = Arc::new(Constant(0.0));
    let mut reports = Vec::new();

    let l = ledger(0.0, 2.0, 0.5)?;
    let (u, f) = on_grid(e, 1.0, res, shifted_quadratic(2.0, -2.0), Arc::new(Constant(-4.0)))?;
    reports.push(tagged(harnack_check_sup(&u, &f, &l)?, "2 - |x|^2"));
    let (u, f) = on_grid(e, 1.0, res, shifted_quadratic(0.0, 2.0), Arc::new(Constant(4.0)))?;
    reports.push(tagged(harnack_check_sub(&u, &f, &l, 1.0)?, "|x|^2"));
    let affine: Arc<dyn Field> = Arc::new(AmbientFn::Linear { a: Vector3::new(1.0, 0.0, 0.0), c: 1.0 });
    let (u, f) = on_grid(e, 1.0, res, affine, zero.clone())?;
    reports.push(tagged(harnack_check_full(&u, &f, &l)?, "1 + x1"));

    let lh = ledger(1.0, 2.0, 0.5)?;
    for s in 0..samples as u64 {
        let seed = cfg.seed.wrapping_mul(1000).wrapping_add(s);
        let case = format!("hyperbolic solver seed={seed}");
        let (u, f) = solver_instance(h, 0.5, res, seed, -1.0)?;
        reports.push(tagged(harnack_check_sup(&u, &f, &lh)?, &case));
        reports.push(tagged(harnack_check_full(&u, &f, &lh)?, &case));
        let (u, f) = solver_instance(h, 0.5, res, seed, 1.0)?;
        reports.push(tagged(harnack_check_sub(&u, &f, &lh, lh.p0 * (1.0 + 1e-9))?, &case));
    }

    let (u, f) = on_grid(e, 1.0, res, shifted_quadratic(-1.0, 0.0), zero.clone())?;
    reports.push(rejection("negative u", "u >= 0 in B_{2R}", &harnack_check_sup(&u, &f, &l)?));
    let (u, f) = on_grid(e, 1.0, res, shifted_quadratic(1.0, 2.0), zero.clone())?;
    reports.push(rejection("subharmonic u", "Delta_nu u <= f in B_{2R}", &harnack_check_sup(&u, &f, &l)?));
    reports.push(rejection("subharmonic u", "Delta_nu u = f in B_{2R}", &harnack_check_full(&u, &f, &l)?));
    let (u, f) = on_grid(e, 1.0, res, Arc::new(Constant(1.0)), zero.clone())?;
    reports.push(rejection("small p", "p >= p0", &harnack_check_sub(&u, &f, &l, l.p0 / 2.0)?));
    let (u, f) = on_grid(h, 1.0, res, Arc::new(Constant(1.0)), zero.clone())?;
    reports.push(rejection("curvature below -K", "Ric_{N,nu} >= -K g on B_{2R}", &harnack_check_full(&u, &f, &l)?));

    let lg = |k| ledger(k, 2.0, 1.0);
    for (m, k) in [(e, 0.0), (h, 1.0)] {
        let inst = GrowthInstance::new(m, m.origin(), 1.0, well(m, 1.0), zero.clone()).with_resolution(res);
        reports.extend(growth_check_with(&inst, &lg(k)?, cfg.exec)?.into_iter().map(|r| tagged(r, &format!("{} well", m.name()))));
    }
    let inst = GrowthInstance::new(e, e.origin(), 0.5, zero.clone(), zero.clone()).with_resolution(res);
    reports.extend(growth_check_with(&inst, &lg(0.0)?, cfg.exec)?.into_iter().map(|r| tagged(r, "zero function r=1/2")));
    let inst = GrowthInstance::new(e, e.origin(), 1.0, well(e, 1.0), zero.clone()).with_resolution(res).with_operator(Operator::PucciMinus(2.0));
    reports.extend(growth_check_with(&inst, &lg(0.0)?, cfg.exec)?.into_iter().map(|r| tagged(r, "pucci theta=2 well")));
    let broken: [(Arc<dyn Field>, Arc<dyn Field>, &str); 4] = [
        (Arc::new(Constant(2.0)), zero.clone(), "inf_{B_{r/2}} u <= 1"),
        (shifted_quadratic(-0.5, 2.0), zero.clone(), "u >= 0 in B_r(x0)"),
        (shifted_quadratic(0.5, 2.0), zero.clone(), "Delta_nu u <= f in B_r(x0)"),
        (Arc::new(Constant(0.5)), Arc::new(Constant(1.0)), "I(f, B_{2R}, 1) <= delta0"),
    ];
    for (u, f, premise) in broken {
        let reps = growth_check_with(&GrowthInstance::new(e, e.origin(), 1.0, u, f).with_resolution(res), &lg(0.0)?, cfg.exec)?;
        reports.push(rejection("growth", premise, &reps[0]));
    }
    Ok(SuiteOutput::new("harnack", cfg, reports))
}

/// Sphere and hyperbolic plane whose expansion curvature is 1.
fn curved() -> [ModelSpace; 2] {
    [ModelSpace::Sphere { k: 2.0 }, ModelSpace::Hyperbolic { k: 2.0 }]
}

/// The Harnack functional against its closed forms and its small-`d` expansion.
pub fn hfun(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let res = cfg.resolution_or(256);
    let mut reports = Vec::new();
    let flat = hfun_numeric_with(&ModelSpace::Euclidean, 1.0, 2 * res, 2 * res, cfg.exec)?;
    reports.push(
        CheckReport::identity("hfun.euclidean", "value 9 on the plane", (flat.value_numeric - 9.0).abs(), 1e-3).diag_f64("value", flat.value_numeric),
    );
    let mut results = vec![flat];
    let mut fits = Vec::new();
    let mut series = Vec::new();
    for (m, sign) in cfg.select(curved().into_iter().zip([-1.0, 1.0]).collect()) {
        let root = m.curvature().abs().sqrt();
        for phi in [0.1, 0.3, 0.5] {
            let r = hfun_numeric_with(&m, 2.0 * phi / root, res, res, cfg.exec)?;
            let rel = (r.value_numeric - r.value_closed).abs() / r.value_closed;
            reports.push(tagged(
                CheckReport::identity("hfun.closed_form", "closed forms on the curved models", rel, 1e-3)
                    .diag_f64("numeric", r.value_numeric)
                    .diag_f64("closed", r.value_closed),
                &format!("{} phi={phi}", m.name()),
            ));
            results.push(r);
        }
        let k = functional_curvature(&m).abs();
        let ds = symmetric_samples(0.1 / k.sqrt(), 12);
        let vals = ds.iter().map(|d| Ok(hfun_numeric_with(&m, d.abs(), 64, 64, cfg.exec)?.value_numeric)).collect::<Result<Vec<_>>>()?;
        let fit = expansion_fit(&ds, &vals, 3)?;
        let anchor = "expansion 9 - 3Kd^2 + 3/8 K^2 d^4";
        let name = m.name();
        reports.push(tagged(CheckReport::identity("hfun.a0", anchor, (fit.a(0) - 9.0).abs(), 1e-3), name));
        reports.push(tagged(CheckReport::identity("hfun.a1", anchor, fit.a(1).abs(), 1e-6), name));
        reports.push(tagged(
            CheckReport::identity("hfun.a2", anchor, (fit.a(2) - sign * 3.0 * k).abs(), 0.01 * 3.0 * k).diag_f64("a2", fit.a(2)),
            name,
        ));
        let quartic = fit_closed_form(&m, 0.3 / k.sqrt(), 12, 4)?;
        let want = 0.375 * k * k;
        reports.push(tagged(
            CheckReport::identity("hfun.a4", anchor, (quartic.a(4) - want).abs(), 0.05 * want).diag_f64("a4", quartic.a(4)),
            name,
        ));
        let curve = (1..=50).map(|i| 1.8 * i as f64 / (50.0 * root)).map(|d| Ok([d, hfun_closed_form(&m, d)?])).collect::<Result<Vec<_>>>()?;
        series.push(Series::new(&format!("closed_form_{name}"), "d", "H", curve));
        fits.push(json!({ "model": m, "numeric_cubic": fit, "closed_quartic": quartic }));
    }
    let mut out = SuiteOutput::new("hfun", cfg, reports).with_data(json!({ "results": results, "fits": fits }));
    for s in series {
        out = out.with_series(s);
    }
    Ok(out)
}

fn psd(rng: &mut SeededRng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.normal());
    &b * b.transpose()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Pucci algebra on seeded matrices, the `E_theta` bounds on every model and
/// the contact bound on seeded pairs.
pub fn pucci(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let samples = cfg.samples_or(1000);
    let mut rng = SeededRng::fork(cfg.seed, 0);
    let mut worst = [0.0f64; 6];
    for i in 0..samples {
        let n = 2 + i % 2;
        let theta = rng.range(1.0, 5.0);
        let h = rng.symmetric(n, 2.0);
        let g = rng.symmetric(n, 2.0);
        let (lo, hi) = pucci_pair(&h, theta)?;
        let (nlo, nhi) = pucci_pair(&(-&h), theta)?;
        worst[0] = worst[0].max(rel(lo, -nhi)).max(rel(hi, -nlo));
        let (t1, t2) = pucci_pair(&h, 1.0)?;
        worst[1] = worst[1].max(rel(t1, h.trace())).max(rel(t2, h.trace()));
        worst[2] = worst[2].max(lo - h.trace()).max(h.trace() - hi);
        let (blo, bhi) = pucci_pair(&(&h + psd(&mut rng, n)), theta)?;
        worst[3] = worst[3].max(lo - blo).max(hi - bhi);
        let (glo, ghi) = pucci_pair(&g, theta)?;
        let (slo, shi) = pucci_pair(&(&h + &g), theta)?;
        worst[4] = worst[4].max(lo + glo - slo);
        worst[5] = worst[5].max(shi - hi - ghi);
    }
    let anchor = "Pucci extremal operators";
    let names = ["pucci.duality", "pucci.trace_collapse", "pucci.trace_bracket", "pucci.monotone", "pucci.superadditive", "pucci.subadditive"];
    let mut reports: Vec<CheckReport> =
        names.iter().zip(worst).map(|(n, w)| CheckReport::identity(*n, anchor, w, 1e-10).diag("samples", samples)).collect();

    for m in cfg.select(models().map(|m| (m, ())).to_vec()).into_iter().map(|(m, _)| m) {
        let mut reps = Vec::new();
        for theta in [1.0, 2.0, 5.0] {
            for big_r in [0.1, 0.3, 0.7] {
                reps.extend(e_theta_bounds(&m, big_r, theta)?);
            }
        }
        reports.push(tagged(tally("pucci.e_theta", "error estimate", &reps), m.name()));
    }

    let pair_models = cfg.select(models()[..3].iter().map(|m| (*m, ())).collect());
    let mut reps = Vec::with_capacity(samples);
    let mut rng = SeededRng::fork(cfg.seed, 1);
    for i in 0..samples {
        let m = pair_models[i % pair_models.len()].0;
        let theta = rng.range(1.0, 4.0);
        let a = rng.range(0.1, 3.0);
        let frame = m.frame(&m.origin());
        let (dx, dy) = rng.in_disc(1.0);
        let x = m.polar_point(&m.origin(), &frame, dx.hypot(dy), dy.atan2(dx));
        let (ex, ey) = rng.in_disc(1.0);
        let y = m.polar_point(&m.origin(), &frame, ex.hypot(ey), ey.atan2(ex));
        let h2 = m.dist_sq_hessian(&y, &x);
        let hd = DMatrix::from_iterator(2, 2, h2.iter().copied());
        let s = psd(&mut rng, 2) - &hd * a;
        reps.push(pucci_contact_bound(&s, &hd, a, theta)?);
    }
    reports.push(tally("pucci.contact_bound", "fully nonlinear", &reps));

    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let mut curve = Vec::new();
    for i in 0..=40 {
        let theta = 1.0 + 0.1 * i as f64;
        curve.push([theta, pucci_pair(&h, theta)?.0]);
    }
    Ok(SuiteOutput::new("pucci", cfg, reports).with_series(Series::new("minus_diag_1_-1", "theta", "M^-(H)", curve)))
}
