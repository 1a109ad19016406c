use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Fock cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),

    #[error("truncated space of dimension {dim} exceeds budget {budget}")]
    BudgetExceeded { dim: usize, budget: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("operator is not hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("malformed squeezing parameter: {0}")]
    MalformedSqueeze(String),

    #[error("singular sample covariance")]
    SingularCovariance,

    #[error("test is not defined: {0}")]
    UndefinedTest(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("level must lie in {range}, got {alpha}")]
    InvalidLevel { alpha: f64, range: &'static str },

    #[error("support bound {bound} exceeded by mass {mass:e}")]
    SupportExceeded { bound: i64, mass: f64 },

    #[error("series or quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
