use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("entry ({row}, {col}) outside a {nrows}x{ncols} matrix")]
    IndexOutOfRange { row: usize, col: usize, nrows: usize, ncols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("matrix must be symmetric (lower-stored)")]
    NotSymmetric,
    #[error("dense oracle limited to dimension {cap}, got {dim}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("variable {name}: lower bound {lower} exceeds upper bound {upper}")]
    InfeasibleBounds { name: String, lower: f64, upper: f64 },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("{0}")]
    Invalid(String),
}

/// Raised by the factorizations; the solver reacts by raising reg_thr.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("factorization failed at pivot {index}: value {pivot:e}")]
pub struct FactorizationFailure {
    pub index: usize,
    pub pivot: f64,
}
