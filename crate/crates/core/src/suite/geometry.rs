use super::{models, tagged, tally, Series, SuiteConfig, SuiteOutput};
use crate::barrier::{check_ricci_comparison, verify_barrier, BarrierSpec};
use crate::constants::{build_ledger, special_function_checks, verify_ledger, CurvatureParams, EffDim};
use crate::error::Result;
use crate::jacobi::{curvature_matrix, integrate_jacobi_frame, verify_comparison, verify_ode_structure, DEFAULT_STEPS};
use crate::measure::{doubling_check, lp_distribution_check, verify_vitali, vitali_cover, BallFamily};
use crate::model::ModelSpace;
use crate::report::CheckReport;
use crate::rng::SeededRng;
use nalgebra::{Matrix2, Vector2};
use std::f64::consts::TAU;

/// Ledger checks on the grid `K x N x R`.
pub fn constants(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut reports = Vec::new();
    let mut ledgers = Vec::new();
    for k in [0.0, 0.5, 1.0, 2.0] {
        for n in [2.0, 3.0, 5.0] {
            for r in [0.5, 1.0, 2.0] {
                let l = build_ledger(CurvatureParams::finite(k, n, r)?)?;
                let case = format!("K={k} N={n} R={r}");
                reports.extend(verify_ledger(&l)?.into_iter().map(|rep| tagged(rep, &case)));
                ledgers.push(l);
            }
        }
    }
    let ts: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    reports.extend(special_function_checks(&ts));
    let mut alpha = Vec::new();
    let mut ln_mu = Vec::new();
    for i in 0..=40 {
        let k = 0.05 * i as f64;
        let l = build_ledger(CurvatureParams::finite(k, 2.0, 1.0)?)?;
        alpha.push([k, l.alpha]);
        ln_mu.push([k, l.ln_mu]);
    }
    Ok(SuiteOutput::new("constants", cfg, reports)
        .with_data(serde_json::to_value(&ledgers).unwrap_or_default())
        .with_series(Series::new("alpha", "K", "alpha", alpha))
        .with_series(Series::new("ln_mu", "K", "ln mu", ln_mu)))
}

fn dims(m: &ModelSpace) -> Vec<EffDim> {
    match m {
        ModelSpace::GaussianPlane { .. } => vec![EffDim::Finite(4.0), EffDim::Infinite],
        _ => vec![EffDim::Finite(2.0), EffDim::Finite(3.0)],
    }
}

/// Closed-form determinant on the sphere plus second-difference checks of
/// `D_N` along seeded geodesics.
pub fn jacobi(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let steps = cfg.resolution_or(DEFAULT_STEPS);
    let samples = cfg.samples_or(100);
    let mut reports = Vec::new();

    let sphere = ModelSpace::Sphere { k: 1.0 };
    let s = 1.2;
    let v = sphere.from_frame(&sphere.origin(), Vector2::new(s, 0.0));
    let st = integrate_jacobi_frame(&sphere, &Matrix2::zeros(), &v, steps)?;
    let det = st.det();
    let resid = st.times.iter().zip(&det).map(|(t, d)| (d - (s * t).cos()).abs()).fold(0.0, f64::max);
    reports.push(
        CheckReport::identity("jacobi.sphere_closed_form", "det J = cos(s t)", resid, 1e-8)
            .diag_f64("wronskian_drift", st.wronskian_drift()),
    );
    let det_series: Vec<[f64; 2]> = st.times.iter().zip(&det).map(|(t, d)| [*t, *d]).collect();

    for (mi, (m, _)) in cfg.select(models().map(|m| (m, ())).to_vec()).into_iter().enumerate() {
        let frame = m.frame(&m.origin());
        let mut per_dim: Vec<Vec<CheckReport>> = vec![Vec::new(); 2 * dims(&m).len()];
        for i in 0..samples {
            let mut rng = SeededRng::fork(cfg.seed, (mi * 1_000_000 + i) as u64);
            let (x, y) = rng.in_disc(0.5);
            let base = m.polar_point(&m.origin(), &frame, x.hypot(y), y.atan2(x));
            let (speed, dir) = (rng.range(0.2, 1.0), rng.range(0.0, TAU));
            let v = m.from_frame(&base, Vector2::new(speed * dir.cos(), speed * dir.sin()));
            let h = rng.symmetric2(0.15);
            let state = integrate_jacobi_frame(&m, &h, &v, steps)?;
            for (di, n) in dims(&m).into_iter().enumerate() {
                let k = m.curvature_bound(n, &m.origin(), 0.5 + speed)?;
                for (j, rep) in verify_comparison(&state, n, k)?.into_iter().enumerate() {
                    per_dim[2 * di + j].push(rep);
                }
            }
        }
        for (di, n) in dims(&m).into_iter().enumerate() {
            for (j, name) in ["jacobi.dn_comparison", "jacobi.dn_uniform"].into_iter().enumerate() {
                let case = format!("{} N={n}", m.name());
                reports.push(tagged(tally(name, "weighted determinant comparison", &per_dim[2 * di + j]), &case));
            }
        }
        let unit = m.from_frame(&m.origin(), Vector2::new(1.0, 0.0));
        let r = curvature_matrix(&m, &unit);
        let mut rng = SeededRng::fork(cfg.seed, (mi * 1_000_000 + 999_999) as u64);
        for rep in verify_ode_structure(&|_| r, steps, 50, &mut rng)? {
            reports.push(tagged(rep, m.name()));
        }
    }
    Ok(SuiteOutput::new("jacobi", cfg, reports).with_series(Series::new("sphere_det", "t", "det J", det_series)))
}

/// Junction smoothness, the barrier lemma items and the distance Laplacian
/// comparison.
pub fn barrier(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut reports = Vec::new();
    let e = ModelSpace::Euclidean;
    for alpha in [2.0, 3.1, 5.0, 10.0] {
        let spec = BarrierSpec::new(alpha, e, e.origin(), 1.0)?;
        let worst = spec.junction_residuals().into_iter().fold(0.0, f64::max);
        reports.push(tagged(CheckReport::identity("barrier.junction_c2", "C2 junction", worst, 1e-8), &format!("alpha={alpha}")));
    }
    let cases = [(ModelSpace::Euclidean, 0.0), (ModelSpace::Hyperbolic { k: 1.0 }, 1.0), (ModelSpace::Hyperbolic { k: 0.5 }, 0.5)];
    for (m, k) in cfg.select(cases.to_vec()) {
        for (n, big_r, r) in [(2.0, 1.0, 1.0), (2.0, 1.0, 0.5), (3.0, 0.5, 0.5)] {
            let p = CurvatureParams::finite(k, n, big_r)?;
            let spec = BarrierSpec::from_params(&p, m, m.origin(), r)?;
            let case = format!("{} K={k} N={n} R={big_r} r={r}", m.name());
            reports.extend(verify_barrier(&spec, &p)?.into_iter().map(|rep| tagged(rep, &case)));
        }
    }
    let dims = [2.0, 2.0, 2.0, 4.0];
    for (m, n) in cfg.select(models().into_iter().zip(dims).collect()) {
        let rad = 0.5 * m.domain_radius().min(2.0);
        for y in [m.origin(), m.polar_point(&m.origin(), &m.frame(&m.origin()), 0.3, 1.0)] {
            let k = m.curvature_bound(EffDim::Finite(n), &y, rad)?;
            let p = CurvatureParams::finite(k, n, 1.0)?;
            reports.extend(check_ricci_comparison(&m, &p, &y, rad)?.into_iter().map(|rep| tagged(rep, m.name())));
        }
    }
    let spec = BarrierSpec::new(2.0, e, e.origin(), 1.0)?;
    let profile = (1..=400).map(|i| i as f64 / 400.0).map(|t| [t, spec.h(t)]).collect();
    Ok(SuiteOutput::new("barrier", cfg, reports).with_series(Series::new("profile_alpha2", "rho / r", "h", profile)))
}

/// Doubling on seeded ball pairs, Vitali covers of seeded families and the
/// `L^p` distribution bracket.
pub fn measure(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let samples = cfg.samples_or(100);
    let mut reports = Vec::new();
    let dims = [2.0, 2.0, 2.0, 4.0];
    for (mi, (m, n)) in cfg.select(models().into_iter().zip(dims).collect()).into_iter().enumerate() {
        let frame = m.frame(&m.origin());
        let mut doubling = Vec::new();
        for i in 0..samples {
            let mut rng = SeededRng::fork(cfg.seed, (mi * 1_000_000 + i) as u64);
            let (x, y) = rng.in_disc(0.4);
            let c = m.polar_point(&m.origin(), &frame, x.hypot(y), y.atan2(x));
            let big_r = rng.range(0.2, 1.1);
            let r1 = big_r * rng.range(0.2, 1.0);
            let r2 = r1 * rng.range(0.05, 0.95);
            let k = m.curvature_bound(EffDim::Finite(n), &c, big_r)?;
            doubling.extend(doubling_check(&m, &CurvatureParams::finite(k, n, big_r)?, &c, r1, r2)?);
        }
        reports.push(tagged(tally("measure.doubling", "volume doubling", &doubling), m.name()));

        let mut vitali = Vec::new();
        for f in 0..5 {
            let mut rng = SeededRng::fork(cfg.seed, (mi * 1_000_000 + 500_000 + f) as u64);
            let fam = BallFamily::random(m, &m.origin(), 1.0, 0.01, 0.3, 200, &mut rng)?;
            let sel = vitali_cover(&fam);
            vitali.extend(verify_vitali(&fam, &sel, cfg.exec));
        }
        reports.push(tagged(tally("measure.vitali", "Vitali cover", &vitali), m.name()));
    }

    let mut rng = SeededRng::fork(cfg.seed, 900_000_000);
    let mut lp = Vec::new();
    for _ in 0..20 {
        let values: Vec<f64> = (0..500).map(|_| (1.5 * rng.normal()).exp()).collect();
        let weights: Vec<f64> = (0..500).map(|_| rng.range(0.5, 1.5)).collect();
        for (c, p) in [(2.0, 0.5), (1.5, 1.0), (3.0, 2.0)] {
            lp.extend(lp_distribution_check(&values, &weights, c, p)?);
        }
    }
    reports.push(tally("measure.lp_bracket", "distribution function bracket", &lp));

    let s = ModelSpace::Sphere { k: 1.0 };
    let p = CurvatureParams::finite(0.0, 2.0, 1.5)?;
    let mut ratio = Vec::new();
    for i in 1..=60 {
        let r = 0.75 * i as f64 / 60.0;
        ratio.push([r, doubling_check(&s, &p, &s.origin(), 2.0 * r, r)?[0].lhs]);
    }
    Ok(SuiteOutput::new("measure", cfg, reports).with_series(Series::new("sphere_doubling", "r", "nu[B_2r] / nu[B_r]", ratio)))
}
