use abplab::measure::*;
use abplab::model::field::random_smooth_field;
use abplab::*;
use std::sync::Arc;

fn models() -> Vec<(ModelSpace, f64)> {
    vec![
        (ModelSpace::Euclidean, 2.0),
        (ModelSpace::sphere(1.0).unwrap(), 2.0),
        (ModelSpace::hyperbolic(1.0).unwrap(), 2.0),
        (ModelSpace::gaussian(1.0).unwrap(), 4.0),
    ]
}

#[test]
fn doubling_on_seeded_ball_pairs() {
    for (mi, (m, n)) in models().into_iter().enumerate() {
        let frame = m.frame(&m.origin());
        let mut rng = SeededRng::fork(11, mi as u64);
        for _ in 0..100 {
            let (x, y) = rng.in_disc(0.4);
            let c = m.polar_point(&m.origin(), &frame, x.hypot(y), y.atan2(x));
            let big_r = rng.range(0.2, 1.1);
            let r1 = big_r * rng.range(0.2, 1.0);
            let r2 = r1 * rng.range(0.05, 0.95);
            let k = m.curvature_bound(EffDim::Finite(n), &c, big_r).unwrap();
            let p = CurvatureParams::finite(k, n, big_r).unwrap();
            for rep in doubling_check(&m, &p, &c, r1, r2).unwrap() {
                assert!(rep.pass, "{}: {rep:?}", m.name());
            }
        }
    }
}

#[test]
fn sphere_doubling_ratio_below_four() {
    let m = ModelSpace::sphere(1.0).unwrap();
    let p = CurvatureParams::finite(0.0, 2.0, 1.5).unwrap();
    let reps = doubling_check(&m, &p, &m.origin(), 1.5, 0.75).unwrap();
    let r: f64 = 0.75;
    assert!((reps[0].lhs - (1.0 - (2.0 * r).cos()) / (1.0 - r.cos())).abs() < 1e-13);
    assert!(reps[1].lhs < 4.0);
}

#[test]
fn vitali_on_seeded_families() {
    for (mi, (m, _)) in models().into_iter().enumerate() {
        for seed in 0..5 {
            let mut rng = SeededRng::fork(13, (mi * 10 + seed) as u64);
            let fam = BallFamily::random(m, &m.origin(), 1.0, 0.01, 0.3, 200, &mut rng).unwrap();
            let sel = vitali_cover(&fam);
            assert!(!sel.is_empty() && sel.len() < 200);
            for rep in verify_vitali(&fam, &sel, Exec::default()) {
                assert!(rep.pass, "{rep:?}");
            }
        }
    }
}

#[test]
fn lp_bracket_on_seeded_fields() {
    let mut rng = SeededRng::new(17);
    for _ in 0..20 {
        let len = 500;
        let values: Vec<f64> = (0..len).map(|_| (1.5 * rng.normal()).exp()).collect();
        let weights: Vec<f64> = (0..len).map(|_| rng.range(0.5, 1.5)).collect();
        for (c, p) in [(2.0, 0.5), (1.5, 1.0), (3.0, 2.0)] {
            for rep in lp_distribution_check(&values, &weights, c, p).unwrap() {
                assert!(rep.pass, "{rep:?}");
            }
        }
    }
    let m = ModelSpace::hyperbolic(1.0).unwrap();
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 1.0, 32).unwrap());
    let f = random_smooth_field(&m, &m.origin(), 1.0, 3.0, &mut rng);
    let u = ScalarField::sample(g.clone(), Arc::new(f));
    let vals: Vec<f64> = u.values.iter().map(|v| v.exp()).collect();
    for rep in lp_distribution_check(&vals, &g.weights, 2.0, 0.5).unwrap() {
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn integral_monotonicity() {
    let mut rng = SeededRng::new(19);
    let cases = [(ModelSpace::sphere(1.0).unwrap(), 0.0), (ModelSpace::hyperbolic(1.0).unwrap(), 1.0)];
    for (m, k) in cases {
        let n = 2.0;
        let big_r = 1.0;
        let e = constants::eta(k, n, big_r);
        for _ in 0..10 {
            let f: Arc<dyn model::Field> = Arc::new(random_smooth_field(&m, &m.origin(), 1.0, 2.0, &mut rng));
            let on = |r: f64| {
                let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), r, 48).unwrap());
                ScalarField::sample(g, f.clone())
            };
            let big = on(1.0);
            assert!(measure::integral_i(&big, n, 1.0).unwrap() <= measure::integral_i(&big, n, 2.0).unwrap() * (1.0 + 1e-12));
            let mut prev = 0.0;
            for r in [0.2, 0.4, 0.7, 1.0] {
                let v = measure::integral_i(&on(r), n, e).unwrap();
                assert!(v >= prev, "{} r={r}: {v} < {prev}", m.name());
                prev = v;
            }
        }
    }
    let m = ModelSpace::Euclidean;
    let g = Arc::new(GeodesicBallGrid::square(m, m.origin(), 0.5, 16).unwrap());
    let c = ScalarField::from_values(g.clone(), vec![-3.0; g.len()], None).unwrap();
    assert!((measure::integral_i(&c, 2.0, 1.5).unwrap() - 0.75).abs() < 1e-14);
}
