use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The photon-number truncation cannot hold the state to the required accuracy.
    #[error("under-truncation at cutoff {cutoff}: tail population {tail:.3e} ({context})")]
    UnderTruncation {
        cutoff: usize,
        tail: f64,
        context: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// Probabilities that cannot come from a single physical state.
    #[error("internal consistency error: {0}")]
    Inconsistent(String),

    #[error("degenerate calibration: {0}")]
    CalibrationDegenerate(String),

    #[error("no violation: Q - S* = {diff:.6e} is not positive")]
    NoViolation { diff: f64 },

    #[error("empty bracket: {0}")]
    EmptyBracket(String),

    #[error("non-finite objective at {0}")]
    NonFinite(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
