use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index {index} out of range for mode {mode} with dimension {dim}")]
    IndexOutOfRange {
        mode: usize,
        index: usize,
        dim: usize,
    },

    #[error("duplicate index tuple {0:?}")]
    DuplicateIndex(Vec<usize>),

    #[error("non-finite entry value at {0:?}")]
    NonFinite(Vec<usize>),

    #[error("exponent {0} is outside (1, inf)")]
    InvalidExponent(f64),

    #[error("part {0} of the vector has zero norm")]
    ZeroPart(usize),

    #[error("part for mode {0} has a non-positive component")]
    NonPositiveComponent(usize),

    #[error("tensor has no nonzero entry")]
    ZeroTensor,

    #[error("tensor has a negative entry")]
    NegativeEntry,

    #[error("no mode satisfies the exponent condition")]
    ConditionViolated,

    #[error("tensor is not weakly irreducible")]
    NotWeaklyIrreducible,

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("singular value must be positive, got {0}")]
    LambdaNotPositive(f64),

    #[error("gradient in the omitted mode vanishes")]
    DegenerateGradient,

    #[error("reduced pair violates the dual system (relative residual {0:e})")]
    DualResidualTooLarge(f64),

    #[error("tensor is not partially symmetric for the given blocks")]
    NotPartiallySymmetric,

    #[error("inconsistent symmetry structure: {0}")]
    InconsistentStructure(String),

    #[error("total dimension {0} exceeds the oracle guard of {1}")]
    DimensionGuard(usize, usize),

    #[error("expected an order-2 tensor, got order {0}")]
    NotAMatrix(usize),

    #[error("trace is too short to estimate a rate")]
    TraceTooShort,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
