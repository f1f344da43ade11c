use abplab::abp::*;
use abplab::model::field::{random_smooth_field, Constant};
use abplab::model::{Profile, Radial};
use abplab::*;
use std::sync::Arc;

fn euclid_quadratic(n: usize, a: f64, b: f64) -> AbpOutcome {
    let m = ModelSpace::Euclidean;
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, n).unwrap());
    let f: Arc<dyn model::Field> = if b == 0.0 {
        Arc::new(Constant(0.3))
    } else {
        Arc::new(Radial::new(m.origin(), Profile::Quadratic { b }))
    };
    let u = ScalarField::sample(g, f);
    // 120 cells at 256, 60 at 128: ring-aligned vertex disc and contact disc.
    let e = AbpInstance::disc_nodes(&u, 0.46875);
    let inst = AbpInstance::new(u, a, 0.0, EffDim::Finite(2.0), e).unwrap();
    evaluate(&inst, Exec::default()).unwrap()
}

#[test]
fn equality_cases_are_exact_and_refine() {
    for b in [0.0, 0.5, 1.0, 2.0] {
        for a in [0.5, 1.0, 2.0] {
            let coarse = euclid_quadratic(128, a, b);
            let fine = euclid_quadratic(256, a, b);
            let (ec, ef) = (coarse.relative_gap().abs(), fine.relative_gap().abs());
            assert!(ef <= 1e-3, "a={a} b={b} gap {ef}");
            assert!(ef <= (ec / 2.0).max(1e-12), "a={a} b={b}: {ec} -> {ef}");
        }
    }
}

#[test]
fn random_fields_satisfy_the_estimate() {
    let cases = [
        (ModelSpace::sphere(1.0).unwrap(), 0.0, EffDim::Finite(2.0), 0.5),
        (ModelSpace::hyperbolic(1.0).unwrap(), 1.0, EffDim::Finite(2.0), 1.0),
        (ModelSpace::gaussian(1.0).unwrap(), 0.0, EffDim::Finite(4.0), 1.0),
        (ModelSpace::gaussian(1.0).unwrap(), 0.0, EffDim::Infinite, 1.0),
    ];
    for (ci, (m, k, n, r)) in cases.into_iter().enumerate() {
        let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, 64).unwrap());
        for s in 0..3 {
            let mut rng = SeededRng::fork(7, (ci * 100 + s) as u64);
            let f = random_smooth_field(&m, &m.origin(), r, 1.0, &mut rng);
            let u = ScalarField::sample(g.clone(), Arc::new(f));
            let inst = AbpInstance::disc(u, 1.0, k, n, m.origin(), r / 3.0).unwrap();
            let rep = abp_check(&inst).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert!(rep.diagnostics["relative_gap"].as_f64().unwrap() > 0.0);
        }
    }
}
