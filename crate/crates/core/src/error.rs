use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown distribution spec `{0}`")]
    UnknownDistribution(String),

    #[error("empty sample")]
    EmptySample,

    #[error("samples must be sorted in non-decreasing order")]
    UnsortedSample,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is numerically singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("sparsity budget {m} out of range 1..={dim}")]
    SparsityOutOfRange { m: usize, dim: usize },

    #[error("vector is not unit norm (norm {0})")]
    NotUnit(f64),

    #[error("zero vector")]
    ZeroVector,

    #[error("net cardinality bound {bound:e} exceeds cap {cap:e}")]
    CardinalityCap { bound: f64, cap: f64 },

    #[error("subspace has dimension {0}, expected 2")]
    WrongSubspaceDimension(usize),

    #[error("empty cell: {0}")]
    EmptyCell(String),

    #[error("parse error: {0}")]
    Parse(String),
}
