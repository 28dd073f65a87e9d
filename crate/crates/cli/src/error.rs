use optomech_witness::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("verification failed: max discrepancy {max:.3e} exceeds {tolerance:.1e}")]
    VerificationFailed { max: f64, tolerance: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
    pub const NO_VIOLATION: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::VerificationFailed { .. } => exit::NUMERICAL,
            CliError::Core(e) => match e {
                CoreError::InvalidArgument(_) | CoreError::Domain(_) | CoreError::EmptyBracket(_) => exit::CONFIG,
                CoreError::NoViolation { .. } => exit::NO_VIOLATION,
                _ => exit::NUMERICAL,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
