//! Crate-wide error type.
//!
//! Library functions return [`Error`] for contract violations (bad dimensions,
//! out-of-range parameters), numerical failures (divergence, incoherent caches),
//! and deliberately refused computations whose cost would explode (grid or
//! enumeration sizes past a hard cap). The CLI maps these variants onto its
//! exit-code taxonomy.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or lengths that do not line up (input dim, parameter vector length, ...).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An invariant the caller promised was violated (e.g. a nonzero coefficient on
    /// an inactive slot).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Divergence, NaN, or an internal consistency check that failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A computation that is well defined but refused because its size is infeasible.
    #[error("infeasible size: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed text in a record or serialized network.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
