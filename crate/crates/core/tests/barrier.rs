use abplab::barrier::*;
use abplab::*;

#[test]
fn junction_is_c2() {
    let m = ModelSpace::Euclidean;
    for alpha in [2.0, 3.1, 5.0, 10.0] {
        let s = BarrierSpec::new(alpha, m, m.origin(), 1.0).unwrap();
        let res = s.junction_residuals();
        assert!(res.iter().all(|&x| x <= 1e-8), "alpha {alpha}: {res:?}");
    }
}

#[test]
fn barrier_lemmas_hold_on_flat_and_hyperbolic_balls() {
    let cases = [(ModelSpace::Euclidean, 0.0), (ModelSpace::hyperbolic(1.0).unwrap(), 1.0), (ModelSpace::hyperbolic(0.5).unwrap(), 0.5)];
    for (m, k) in cases {
        for (n, big_r, r) in [(2.0, 1.0, 1.0), (2.0, 1.0, 0.5), (3.0, 0.5, 0.5)] {
            let p = CurvatureParams::finite(k, n, big_r).unwrap();
            let s = BarrierSpec::from_params(&p, m, m.origin(), r).unwrap();
            let reps = verify_barrier(&s, &p).unwrap();
            assert_eq!(reps.len(), 6);
            for rep in &reps {
                assert!(rep.pass, "{} k={k} n={n} r={r}: {rep:?}", m.name());
            }
        }
    }
}

#[test]
fn barrier_rejects_curvature_below_the_bound() {
    let m = ModelSpace::hyperbolic(2.0).unwrap();
    let p = CurvatureParams::finite(1.0, 2.0, 1.0).unwrap();
    let s = BarrierSpec::from_params(&p, m, m.origin(), 1.0).unwrap();
    let reps = verify_barrier(&s, &p).unwrap();
    let inner = reps.iter().find(|r| r.name == "barrier.laplacian_inner").unwrap();
    assert!(!inner.pass && inner.premise_violated.is_some());
}

#[test]
fn ricci_comparison_on_all_models() {
    let models = [
        (ModelSpace::Euclidean, 2.0),
        (ModelSpace::sphere(1.0).unwrap(), 2.0),
        (ModelSpace::hyperbolic(1.0).unwrap(), 2.0),
        (ModelSpace::gaussian(1.0).unwrap(), 4.0),
    ];
    for (m, n) in models {
        let rad = 0.5 * m.domain_radius().min(2.0);
        for y in [m.origin(), m.polar_point(&m.origin(), &m.frame(&m.origin()), 0.3, 1.0)] {
            let k = m.curvature_bound(EffDim::Finite(n), &y, rad).unwrap();
            let p = CurvatureParams::finite(k, n, 1.0).unwrap();
            for rep in check_ricci_comparison(&m, &p, &y, rad).unwrap() {
                assert!(rep.pass, "{}: {rep:?}", m.name());
            }
        }
    }
}

#[test]
fn ricci_comparison_premise() {
    let m = ModelSpace::hyperbolic(1.0).unwrap();
    let p = CurvatureParams::finite(0.5, 2.0, 1.0).unwrap();
    let reps = check_ricci_comparison(&m, &p, &m.origin(), 0.5).unwrap();
    assert!(reps.iter().all(|r| r.premise_violated.is_some()));
}
