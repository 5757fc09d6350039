use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("process has zero trace")]
    ZeroTrace,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tomography input: {0}")]
    Tomography(String),

    #[error("solver returned {status} for {quantity} (gap {gap:.3e}, {iterations} iterations)")]
    Solver {
        quantity: &'static str,
        status: crate::sdp::SolveStatus,
        gap: f64,
        iterations: usize,
    },

    #[error("format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(
    op: &'static str,
    expected: impl ToString,
    found: impl ToString,
) -> Error {
    Error::DimensionMismatch {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
