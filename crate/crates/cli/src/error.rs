use photoemission::Error;
use thiserror::Error as ThisError;

/// Exit status of each error class. Usage errors (unknown flags or
/// subcommands) exit with 2 from the argument parser.
pub mod exit {
    pub const CONFIG: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const ACCURACY: i32 = 5;
    pub const IO: i32 = 6;
    pub const INTERNAL: i32 = 7;
}

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Invalid(_) => exit::VALIDATION,
            CliError::Solver(e) => match e {
                Error::Validation { .. } | Error::Domain { .. } => exit::VALIDATION,
                Error::Accuracy { .. }
                | Error::Solver { .. }
                | Error::Conditioning { .. }
                | Error::Overflow { .. } => exit::ACCURACY,
            },
            CliError::Io { .. } => exit::IO,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}
