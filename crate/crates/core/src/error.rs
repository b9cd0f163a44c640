use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e}, norm {norm:e})")]
    NotPsd { min_eigenvalue: f64, norm: f64 },

    #[error("gram mismatch {mismatch:e} exceeds tolerance {tolerance:e}")]
    GramMismatch { mismatch: f64, tolerance: f64 },

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("operation requires exactly one test function, family has {0}")]
    WrongFamily(usize),

    #[error("infeasible kernel: {0}")]
    InfeasibleKernel(String),

    #[error("decomposition invalid: {0}")]
    DecompositionInvalid(String),

    #[error("index {index} out of range for {len} points")]
    Index { index: usize, len: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular resolvent")]
    SingularResolvent,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
