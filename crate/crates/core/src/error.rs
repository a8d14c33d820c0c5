use thiserror::Error;

/// Errors raised by the algebra, filtration, martingale and bound routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty matrix")]
    Empty,

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    SolverFailure { sweeps: usize, off: f64 },

    #[error("function undefined at eigenvalue {0}")]
    Domain(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("level {level} out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("construction failed at index {index}: {reason}")]
    Construction { index: usize, reason: String },

    #[error("degenerate draw after {0} attempts")]
    DegenerateDraw(usize),

    #[error("degenerate bound: denominator {0} is not positive")]
    Degenerate(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
