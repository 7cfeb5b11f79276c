use thiserror::Error;

/// Errors produced by the spectral-analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdftError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence has no known samples")]
    EmptySequence,

    #[error("non-finite value at known sample {index}")]
    InfValue { index: usize },

    #[error("sampling times are not strictly increasing at index {index}")]
    NonMonotonicTimes { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("weight vector has {positive} positive entries, at least {required} required")]
    TooFewNonzeroWeights { positive: usize, required: usize },

    #[error("correlation matrix is singular or indefinite")]
    SingularOrIndefinite,

    #[error("Levinson recursion broke down at order {order}")]
    RecursionBreakdown { order: usize },

    #[error("quadratic form diagonal is not positive at frequency index {index}")]
    NonPositiveDiagonal { index: usize },

    #[error("autocorrelation matrix is singular")]
    SingularAutocorrelation,

    #[error("weighting matrix Q is singular or not positive definite")]
    SingularQ,

    #[error("jittered times are not strictly increasing at index {index}")]
    MonotonicityViolated { index: usize },

    #[error("invalid frequency band [{lo}, {hi}] Hz")]
    InvalidBand { lo: f64, hi: f64 },

    #[error("cannot remove {requested} samples from a sequence with {known} known samples")]
    TooManyRemovals { requested: usize, known: usize },

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, EdftError>;

impl From<csv::Error> for EdftError {
    fn from(e: csv::Error) -> Self {
        EdftError::Csv(e.to_string())
    }
}
