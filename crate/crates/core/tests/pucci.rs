use abplab::harnack::pucci::{e_theta_bounds, extremal_coefficients, sym_eigenvalues};
use abplab::harnack::{e_theta, pucci, pucci_contact_bound};
use abplab::*;
use nalgebra::DMatrix;
use std::f64::consts::TAU;

const SAMPLES: usize = 1000;

fn sym(rng: &mut SeededRng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| scale * rng.normal());
    (&a + a.transpose()) * 0.5
}

fn psd(rng: &mut SeededRng, n: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.normal());
    &b * b.transpose()
}

/// `Q diag(1 + (theta - 1) s_i) Q^T` with `s_i` uniform in `[0, 1]`.
fn elliptic(rng: &mut SeededRng, theta: f64) -> DMatrix<f64> {
    let phi = rng.range(0.0, TAU);
    let q = DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()]);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(2, |_, _| 1.0 + (theta - 1.0) * rng.range(0.0, 1.0)));
    &q * d * q.transpose()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn algebraic_identities() {
    let mut rng = SeededRng::new(11);
    for i in 0..SAMPLES {
        let n = 2 + i % 2;
        let theta = rng.range(1.0, 5.0);
        let h = sym(&mut rng, n, 2.0);
        let g = sym(&mut rng, n, 2.0);
        let (lo, hi) = pucci(&h, theta).unwrap();
        let (nlo, nhi) = pucci(&(-&h), theta).unwrap();
        assert!(close(lo, -nhi) && close(hi, -nlo));
        assert!(lo <= h.trace() + 1e-12 && h.trace() <= hi + 1e-12);
        let (t1, t2) = pucci(&h, 1.0).unwrap();
        assert!(close(t1, h.trace()) && close(t2, h.trace()));
        // monotone
        let bigger = &h + psd(&mut rng, n);
        let (blo, bhi) = pucci(&bigger, theta).unwrap();
        assert!(lo <= blo + 1e-10 && hi <= bhi + 1e-10);
        // super/subadditive
        let (glo, ghi) = pucci(&g, theta).unwrap();
        let (slo, shi) = pucci(&(&h + &g), theta).unwrap();
        assert!(slo >= lo + glo - 1e-10, "{slo} {lo} {glo}");
        assert!(shi <= hi + ghi + 1e-10);
    }
}

#[test]
fn extremal_bracket_over_elliptic_coefficients() {
    let mut rng = SeededRng::new(12);
    for _ in 0..20 {
        let theta = rng.range(1.5, 4.0);
        let h = sym(&mut rng, 2, 1.0);
        let (lo, hi) = pucci(&h, theta).unwrap();
        for _ in 0..200 {
            let a = elliptic(&mut rng, theta);
            let ev = sym_eigenvalues(&a).unwrap();
            assert!(ev[0] >= 1.0 - 1e-12 && ev[1] <= theta + 1e-12);
            let t = (&a * &h).trace();
            assert!(lo - 1e-12 <= t && t <= hi + 1e-12);
        }
        let a_min = extremal_coefficients(&h, theta, false).unwrap();
        let a_max = extremal_coefficients(&h, theta, true).unwrap();
        assert!(((&a_min * &h).trace() - lo).abs() <= 1e-9);
        assert!(((&a_max * &h).trace() - hi).abs() <= 1e-9);
    }
}

#[test]
fn contact_bound_on_seeded_pairs() {
    let mut rng = SeededRng::new(13);
    let models = [
        ModelSpace::Euclidean,
        ModelSpace::sphere(1.0).unwrap(),
        ModelSpace::hyperbolic(1.0).unwrap(),
    ];
    for i in 0..SAMPLES {
        let m = models[i % models.len()];
        let theta = rng.range(1.0, 4.0);
        let a = rng.range(0.1, 3.0);
        let frame = m.frame(&m.origin());
        let (dx, dy) = rng.in_disc(1.0);
        let x = m.polar_point(&m.origin(), &frame, (dx * dx + dy * dy).sqrt(), dy.atan2(dx));
        let (ex, ey) = rng.in_disc(1.0);
        let y = m.polar_point(&m.origin(), &frame, (ex * ex + ey * ey).sqrt(), ey.atan2(ex));
        let h2 = m.dist_sq_hessian(&y, &x);
        let hd = DMatrix::from_iterator(2, 2, h2.iter().copied());
        let s = psd(&mut rng, 2) - &hd * a;
        let rep = pucci_contact_bound(&s, &hd, a, theta).unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn contact_bound_is_tight_for_flat_hessian_at_theta_one() {
    let mut rng = SeededRng::new(14);
    let id = DMatrix::<f64>::identity(2, 2);
    for _ in 0..100 {
        let s = psd(&mut rng, 2) - &id;
        let rep = pucci_contact_bound(&s, &id, 1.0, 1.0).unwrap();
        assert!(rep.pass);
        assert!((rep.rhs - rep.lhs).abs() < 1e-12);
    }
}

#[test]
fn e_theta_respects_bounds_on_all_models() {
    let models = [
        ModelSpace::Euclidean,
        ModelSpace::sphere(1.0).unwrap(),
        ModelSpace::hyperbolic(1.0).unwrap(),
        ModelSpace::gaussian(1.0).unwrap(),
    ];
    for m in models {
        for theta in [1.0, 2.0, 5.0] {
            for big_r in [0.1, 0.3, 0.7] {
                for rep in e_theta_bounds(&m, big_r, theta).unwrap() {
                    assert!(rep.pass, "{} {rep:?}", m.name());
                }
            }
        }
    }
    let e = e_theta(&ModelSpace::hyperbolic(1.0).unwrap(), 1.0, 2.0).unwrap();
    assert!((e - 2.3130352854993315).abs() < 1e-9);
    assert_eq!(e_theta(&ModelSpace::Euclidean, 1.0, 3.0).unwrap(), 4.0);
}
