use std::path::PathBuf;

use thiserror::Error;

/// `EX_USAGE`/`EX_DATAERR` style input problem.
pub const EXIT_INPUT: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;
/// The generator gave up after its resampling budget.
pub const EXIT_RESAMPLE: i32 = 75;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("generator gave up: {0}")]
    Resample(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Self::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Read { .. } | Self::Parse { .. } | Self::Usage(_) => EXIT_INPUT,
            Self::Resample(_) => EXIT_RESAMPLE,
            Self::Write { .. } | Self::Internal(_) => EXIT_INTERNAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
