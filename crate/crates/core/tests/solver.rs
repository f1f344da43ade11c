use abplab::harnack::*;
use abplab::model::field::{random_smooth_field, Field};
use abplab::model::{Profile, Radial};
use abplab::*;
use std::sync::Arc;

#[derive(Debug)]
struct LaplacianOf(Arc<dyn Field>);

impl Field for LaplacianOf {
    fn value(&self, m: &ModelSpace, p: &Point) -> f64 {
        self.0.laplacian_nu(m, p).unwrap()
    }
}

fn max_error(m: ModelSpace, center: Point, r: f64, n: usize, u: Arc<dyn Field>) -> (f64, usize) {
    let g = Arc::new(GeodesicBallGrid::square(m, center, r, n).unwrap());
    let prob = DirichletProblem::from_fields(g.clone(), &LaplacianOf(u.clone()), &*u).unwrap();
    let sol = solve_poisson(&prob).unwrap();
    let err = g.nodes.iter().zip(&sol.u.values).map(|(p, v)| (u.value(&m, p) - v).abs()).fold(0.0, f64::max);
    (err, sol.iterations)
}

#[test]
fn euclidean_quadratic_is_recovered() {
    let m = ModelSpace::Euclidean;
    let u: Arc<dyn Field> = Arc::new(Radial::new(m.origin(), Profile::Quadratic { b: 2.0 }));
    let (err, _) = max_error(m, m.origin(), 1.0, 128, u);
    assert!(err <= 1e-3, "{err}");
}

#[test]
fn gaussian_radial_square_is_recovered() {
    let m = ModelSpace::gaussian(1.0).unwrap();
    let u: Arc<dyn Field> = Arc::new(Radial::new(m.origin(), Profile::Quadratic { b: 2.0 }));
    let p = Point::planar(0.5, 0.0);
    assert!((u.laplacian_nu(&m, &p).unwrap() - (4.0 - 2.0 * 0.25)).abs() < 1e-12);
    let (err, _) = max_error(m, m.origin(), 1.0, 128, u);
    assert!(err <= 1e-3, "{err}");
}

#[test]
fn second_order_convergence_on_all_models() {
    let models = [
        ModelSpace::Euclidean,
        ModelSpace::sphere(1.0).unwrap(),
        ModelSpace::hyperbolic(1.0).unwrap(),
        ModelSpace::gaussian(1.0).unwrap(),
    ];
    let mut rng = SeededRng::new(23);
    for m in models {
        let center = m.polar_point(&m.origin(), &m.frame(&m.origin()), 0.3, 0.7);
        let u: Arc<dyn Field> = Arc::new(random_smooth_field(&m, &center, 0.8, 1.0, &mut rng));
        let (e1, it1) = max_error(m, center, 0.8, 64, u.clone());
        let (e2, it2) = max_error(m, center, 0.8, 128, u);
        assert!(e1 / e2 >= 3.0, "{}: {e1} -> {e2}", m.name());
        assert!(it1 < 100 && it2 < 100, "{}: {it1} {it2}", m.name());
    }
}

#[test]
fn discrete_maximum_principle() {
    let mut rng = SeededRng::new(29);
    for m in [ModelSpace::hyperbolic(1.0).unwrap(), ModelSpace::gaussian(2.0).unwrap()] {
        let center = Point::planar(0.2, 0.0);
        let center = if m.is_planar() { center } else { m.polar_point(&m.origin(), &m.frame(&m.origin()), 0.2, 0.0) };
        let g = Arc::new(GeodesicBallGrid::square(m, center, 1.0, 64).unwrap());
        let f: Vec<f64> = (0..g.len()).map(|_| -rng.uniform()).collect();
        let b: Vec<f64> = (0..g.n_theta).map(|_| rng.uniform()).collect();
        let sol = solve_poisson(&DirichletProblem::new(g, f, b).unwrap()).unwrap();
        assert!(sol.u.values.iter().all(|&v| v >= -1e-9));
    }
}
