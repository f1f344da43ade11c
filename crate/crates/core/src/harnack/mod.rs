//! Dirichlet solver, Harnack inequality checks, the growth lemma pipeline
//! and Pucci operators.

pub mod checks;
pub mod growth;
pub mod pucci;
pub mod solver;

pub use checks::{harnack_check_full, harnack_check_sub, harnack_check_sup, Relation};
pub use growth::{growth_check, growth_check_with, GrowthInstance, Operator};
pub use pucci::{e_theta, pucci, pucci_contact_bound, PucciParams};
pub use solver::{solve_poisson, DirichletProblem, PoissonSolution};
