use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("invalid sequence space: {0}")]
    InvalidSpec(String),

    #[error("invalid scalar literal `{0}`")]
    InvalidScalar(String),

    #[error("matrix must be nonempty with consistent row lengths")]
    EmptyMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense system is {rows}x{cols}; cannot materialize it as {n}x{m}")]
    TruncationOfDense { rows: usize, cols: usize, n: usize, m: usize },

    #[error("brute-force oracle supports at most {max} domain dimensions, got {got}")]
    OracleDimensionExceeded { max: usize, got: usize },

    #[error("lower bound violated: smallest singular value {sigma_min:e} is below tolerance")]
    LowerBoundViolation { sigma_min: f64 },

    #[error("frame operator is singular on the truncated space")]
    SingularFrameOperator,

    #[error("operator is not surjective (rank {rank} < {rows})")]
    NotSurjective { rank: usize, rows: usize },

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("invalid term: {0}")]
    InvalidTerm(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("no operator V maps the first system onto the second (residual {residual:e})")]
    TransformInfeasible { residual: f64 },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = FrameError> = std::result::Result<T, E>;
