use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: left {left}, right {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("contraction mismatch: column group {left} does not match row group {right}")]
    ContractionMismatch { left: String, right: String },

    #[error("tensor is not square: {0}")]
    NotSquare(String),

    #[error("tensor is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("tensor is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("singular unfolding (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("fold target {rows}x{cols} inconsistent with shape {shape}")]
    FoldMismatch { rows: usize, cols: usize, shape: String },

    #[error("Ky Fan order k={k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("function undefined at eigenvalue {0:e}")]
    Domain(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("infeasible threshold split: Theta {theta} <= |a0| k = {floor}")]
    InfeasibleSplit { theta: f64, floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fixture parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("run invalid: {excluded} of {trials} trials produced non-finite statistics")]
    TooManyExcluded { excluded: usize, trials: usize },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
