//! Numerical laboratory for ABP-type measure estimates and Harnack inequalities
//! on two-dimensional model metric-measure spaces.

pub mod abp;
pub mod barrier;
pub mod constants;
pub mod contact;
pub mod error;
pub mod exec;
pub mod harnack;
pub mod hfun;
pub mod jacobi;
pub mod measure;
pub mod model;
pub mod report;
pub mod rng;
pub mod special;
pub mod suite;

pub use constants::{build_ledger, verify_ledger, ConstantsLedger, CurvatureParams, EffDim};
pub use error::{LabError, Result};
pub use exec::Exec;
pub use model::{GeodesicBallGrid, ModelSpace, Point, ScalarField, TangentVector};
pub use report::CheckReport;
pub use rng::SeededRng;
