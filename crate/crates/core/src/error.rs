use thiserror::Error;

/// Errors raised by problem construction and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed domain: {0}")]
    MalformedDomain(String),

    #[error("site index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("complex catalyst roots: 4*a_plus*a_minus = {0} > 1")]
    ComplexRoots(f64),

    #[error("|n| = {n} exceeds bound N = {bound}")]
    OutOfBound { n: i64, bound: usize },

    #[error("unstable profile: normalization denominator {0} <= 0")]
    UnstableProfile(f64),

    #[error("singular discretization: pivot {0} vanishes")]
    SingularDiscretization(f64),

    #[error("singular matrix: zero pivot at row {0}")]
    SingularMatrix(usize),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
