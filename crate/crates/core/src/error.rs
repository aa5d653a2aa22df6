use thiserror::Error;

/// Errors raised by the counting, regularity and lattice routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not a prime >= 3")]
    NotPrime(u64),
    #[error("field element {value} is zero modulo {q}")]
    ZeroElement { value: u64, q: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid hypergraph bundle: {0}")]
    InvalidBundle(String),
    #[error("block {0} does not appear in the edge")]
    BlockAbsent(usize),
    #[error("function exceeds bound {bound}: found |value| = {found}")]
    Unbounded { bound: f64, found: f64 },
    #[error("box average {0} is negative")]
    NegativeBoxAverage(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate simplex: Gram matrix is not positive definite")]
    DegenerateSimplex,
    #[error("bound {bound} may clip copies: need bound >= {needed}")]
    BoundTooSmall { bound: i64, needed: i64 },
    #[error("no copies at lambda^2 = {0}")]
    NoCopies(u64),
    #[error("desk-scale cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid scale sequence: {0}")]
    InvalidScales(String),
    #[error("witness search failed on edge {edge} with residual box norm {norm}")]
    WitnessNotFound { edge: String, norm: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
