use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Exit code for malformed input: arguments, config files or data files.
pub const EXIT_INPUT: u8 = 2;
/// Exit code for failures inside the numerical model.
pub const EXIT_SOLVER: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },

    #[error("{path}:{line}: {message}")]
    Record { path: PathBuf, line: u64, message: String },

    #[error(transparent)]
    Model(#[from] arraymode::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use arraymode::Error as E;
        match self {
            CliError::Model(E::InvalidParameter { .. } | E::FrequencyAbovePlasma { .. }) => EXIT_INPUT,
            CliError::Model(_) => EXIT_SOLVER,
            _ => EXIT_INPUT,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
