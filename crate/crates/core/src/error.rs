use thiserror::Error;

use crate::radius::LogRadius;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("all precision lost: divisor is zero modulo p^{0}")]
    AllPrecisionLost(i64),
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("unsupported prime {0} (need an odd prime)")]
    UnsupportedPrime(u64),
    #[error("uncertified result; best bound {bound}")]
    Uncertified { bound: LogRadius },
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("convergence precondition not met: {0}")]
    Convergence(String),
    #[error("degenerate operator: {0}")]
    Degenerate(String),
    #[error("malformed module: {0}")]
    MalformedModule(String),
    #[error("not compatible: {0}")]
    NotCompatible(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("limit did not converge: {0}")]
    Divergence(String),
    #[error("certification failed: wanted precision {wanted}, achieved {achieved}")]
    Certification { wanted: i64, achieved: i64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
