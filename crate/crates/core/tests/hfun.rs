use abplab::hfun::*;
use abplab::*;
use std::f64::consts::TAU;

/// Sphere and hyperbolic plane whose expansion curvature `K` is 1.
fn curved() -> [ModelSpace; 2] {
    [ModelSpace::sphere(2.0).unwrap(), ModelSpace::hyperbolic(2.0).unwrap()]
}

/// Radius with `sqrt(|k|) d / 2 = phi`.
fn radius_for(m: &ModelSpace, phi: f64) -> f64 {
    2.0 * phi / m.curvature().abs().sqrt()
}

#[test]
fn euclidean_value_is_nine() {
    let r = hfun_numeric(&ModelSpace::Euclidean, 1.0, 512, 512).unwrap();
    assert!((r.value_numeric - 9.0).abs() <= 1e-3, "{}", r.value_numeric);
    assert!((r.theta_used - 0.5).abs() < 1e-12);
    let g = hfun_numeric(&ModelSpace::gaussian(1.0).unwrap(), 0.7, 64, 64).unwrap();
    assert!((g.value_numeric - 9.0).abs() <= 1e-6, "{}", g.value_numeric);
}

#[test]
fn numeric_matches_closed_forms() {
    for m in curved() {
        for phi in [0.1, 0.3, 0.5] {
            let d = radius_for(&m, phi);
            let r = hfun_numeric(&m, d, 256, 256).unwrap();
            let rel = (r.value_numeric - r.value_closed).abs() / r.value_closed;
            assert!(rel <= 1e-3, "{} phi {phi}: {rel}", m.name());
            assert!(r.value_numeric <= r.value_closed * (1.0 + 1e-6));
            assert!((r.theta_used - theta_ratio(&m, d).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn theta_identity() {
    let mut rng = SeededRng::new(21);
    for m in curved() {
        for _ in 0..20 {
            let d = radius_for(&m, rng.range(0.01, 0.95));
            let t = theta_ratio(&m, d).unwrap();
            let lhs = ((1.0 + t) / (1.0 - t)).powi(2);
            assert!((lhs - hfun_closed_form(&m, d).unwrap()).abs() <= 1e-12 * lhs);
        }
        assert!((theta_ratio(&m, 1e-6).unwrap() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn point_masses_dominate_mixtures() {
    let mut rng = SeededRng::new(22);
    for m in [ModelSpace::Euclidean, ModelSpace::sphere(1.0).unwrap(), ModelSpace::hyperbolic(1.0).unwrap()] {
        let d = 1.2;
        let best = hfun_numeric(&m, d, 64, 64).unwrap();
        let pts = ball_samples(best.theta_used, 64);
        for _ in 0..100 {
            let atoms: Vec<(f64, f64)> = (0..1 + rng.below(8)).map(|_| (rng.range(0.0, 1.0), rng.range(0.0, TAU))).collect();
            let ratio = mixture_ratio(&atoms, &pts).unwrap();
            assert!(ratio <= best.value_numeric + 1e-9, "{ratio} > {}", best.value_numeric);
        }
    }
}

#[test]
fn numeric_converges_under_refinement() {
    let m = ModelSpace::sphere(2.0).unwrap();
    let d = radius_for(&m, 0.5);
    let closed = hfun_closed_form(&m, d).unwrap();
    let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| (hfun_numeric(&m, d, n, n).unwrap().value_numeric - closed).abs()).collect();
    assert!(errs[1] <= errs[0] / 2.0 && errs[2] <= errs[1] / 2.0, "{errs:?}");
}

#[test]
fn expansion_recovers_the_curvature_terms() {
    let flat = fit_closed_form(&ModelSpace::Euclidean, 0.3, 12, 3).unwrap();
    assert!((flat.a(0) - 9.0).abs() < 1e-8 && flat.a(1).abs() < 1e-8 && flat.a(2).abs() < 1e-8);
    for (m, sign) in curved().into_iter().zip([-1.0, 1.0]) {
        let k = functional_curvature(&m).abs();
        let ds = symmetric_samples(0.1 / k.sqrt(), 12);
        let vals: Vec<f64> = ds.iter().map(|d| hfun_numeric(&m, d.abs(), 64, 64).unwrap().value_numeric).collect();
        let fit = expansion_fit(&ds, &vals, 3).unwrap();
        assert!((fit.a(0) - 9.0).abs() <= 1e-3);
        assert!(fit.a(1).abs() <= 1e-6);
        assert!((fit.a(2) - sign * 3.0 * k).abs() <= 0.03 * k, "{}", fit.a(2));
        let quartic = fit_closed_form(&m, 0.3 / k.sqrt(), 12, 4).unwrap();
        assert!((quartic.a(4) - 0.375 * k * k).abs() <= 0.05 * 0.375 * k * k, "{}", quartic.a(4));
    }
}

#[test]
fn one_sided_fit_has_vanishing_linear_term() {
    for m in curved() {
        let ds: Vec<f64> = (1..=24).map(|i| 0.3 * i as f64 / 24.0).collect();
        let vals: Vec<f64> = ds.iter().map(|d| hfun_closed_form(&m, *d).unwrap()).collect();
        let fit = expansion_fit(&ds, &vals, 6).unwrap();
        assert!(fit.a(1).abs() <= 1e-6, "{}", fit.a(1));
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let s = ModelSpace::sphere(1.0).unwrap();
    assert!(matches!(hfun_numeric(&s, 0.5, 16, 64), Err(LabError::Resolution { got: 16, min: 32 })));
    assert!(matches!(hfun_closed_form(&s, 3.0), Err(LabError::Chart(_))));
    assert!(matches!(expansion_fit(&[0.1; 8], &[9.0; 8], 3), Err(LabError::IllConditioned(_))));
}
