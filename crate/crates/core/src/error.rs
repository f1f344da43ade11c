use thiserror::Error;

/// Errors raised by the numerical routines. Findings about the mathematics
/// (a failed inequality, a violated premise) are reported through
/// [`crate::report::CheckReport`] instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("point is not on the model: {0}")]
    InvalidPoint(String),
    #[error("antipodal pair on the sphere (cut locus)")]
    Antipodal,
    #[error("norm {norm} exceeds cut radius {cut}")]
    CutRadius { norm: f64, cut: f64 },
    #[error("grid resolution {got} below minimum {min}")]
    Resolution { got: usize, min: usize },
    #[error("node ({i}, {j}) lies on the boundary ring")]
    BoundaryNode { i: usize, j: usize },
    #[error("closed-form derivatives unavailable for this field")]
    MissingClosedForm,
    #[error("vertex set is empty")]
    EmptyVertexSet,
    #[error("contact set touches the boundary ring at {count} node(s)")]
    ContactTouchesBoundary { count: usize },
    #[error("jacobi determinant is nonpositive at t = {t}")]
    NonPositiveDeterminant { t: f64 },
    #[error("geometric series diverges: ratio {ratio}")]
    DivergentSeries { ratio: f64 },
    #[error("matrix is not symmetric (asymmetry {0})")]
    Asymmetric(f64),
    #[error("singular matrix at t = {t}")]
    Singular { t: f64 },
    #[error("iteration did not converge: residual {residual} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
    #[error("second differences are noise dominated (discrepancy {0})")]
    SamplingTooCoarse(f64),
    #[error("outside chart validity: {0}")]
    Chart(String),
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
