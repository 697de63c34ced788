use thiserror::Error;

use crate::tensor::Convention;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a tensor in {expected} convention, got {found}")]
    Convention {
        expected: Convention,
        found: Convention,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("symmetry violation: {what} (residual {residual:.3e}, tolerance {tol:.3e})")]
    Symmetry {
        what: String,
        residual: f64,
        tol: f64,
    },

    #[error("matrix is not unitary (‖u†u − I‖ = {0:.3e})")]
    NotUnitary(f64),

    #[error("factor {index}: {reason}")]
    Factor { index: usize, reason: String },

    #[error("Sz violation: {count} entries above tolerance, worst {worst:?}")]
    SzViolation {
        count: usize,
        worst: Vec<([usize; 4], f64)>,
    },

    #[error("oracle refuses {modes} modes (cap {cap})")]
    OracleCap { modes: usize, cap: usize },

    #[error("optimizer failed on every start at greedy iteration {iteration}: {reason}")]
    Optimizer {
        iteration: usize,
        reason: String,
        /// Factors accepted before the failing iteration.
        partial: Box<crate::compression::Compression>,
    },

    #[error("integral tensor is indefinite: eigenvalue {0:.3e}")]
    Indefinite(f64),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
