use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("matrix not symmetric: max asymmetry {asymmetry:.3e} exceeds tolerance")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix not positive definite: non-positive pivot at index {pivot}")]
    NotPositiveDefinite { pivot: usize },
    #[error("matrix rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("matrix singular")]
    Singular,
    #[error("QR iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("invalid dimensions: {0}")]
    Dimension(String),
    #[error("D not positive definite")]
    HessianNotPositiveDefinite,
    #[error("A not full row rank")]
    ANotFullRowRank,
    #[error("B not full column rank")]
    BNotFullColumnRank,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KrylovError {
    #[error("operator failed symmetry probe: relative asymmetry {0:.3e}")]
    NotSymmetric(f64),
    #[error("breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: &'static str },
    #[error("non-finite residual at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("dimension mismatch: operator {operator}, vector {vector}")]
    Dimension { operator: usize, vector: usize },
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Krylov(#[from] KrylovError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
