use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate point at indices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("distance matrix is not realizable in dimension {dim}: {reason}")]
    NotRealizable { dim: usize, reason: String },
    #[error("inconsistent distances: {0}")]
    Inconsistent(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("tuple space of size {size} exceeds the cap {cap}")]
    TupleCapExceeded { size: u128, cap: u128 },
    #[error("candidate count {count} exceeds the cap {cap}")]
    CandidateCapExceeded { count: u128, cap: u128 },
    #[error("forbidden-region depth {bound} exceeds the cap {cap}")]
    DepthCapExceeded { bound: usize, cap: usize },
    #[error("bad color input: {0}")]
    BadColors(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("reconstruction failed: {0}")]
    Unresolved(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
