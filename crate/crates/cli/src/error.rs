use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NOT_CONVERGED: u8 = 3;
pub const EXIT_GATE: u8 = 4;
/// I/O and internal failures.
pub const EXIT_OTHER: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dnls_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed state file: {msg}")]
    StateFormat { path: PathBuf, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::StateFormat { .. } => EXIT_CONFIG,
            CliError::Core(dnls_core::Error::Config(_) | dnls_core::Error::Domain(_)) => {
                EXIT_CONFIG
            }
            CliError::Core(dnls_core::Error::Contract(_)) | CliError::Io { .. } => EXIT_OTHER,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
