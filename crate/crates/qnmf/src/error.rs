use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A data file failed to parse.
    #[error("{}: line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Core(#[from] qnmf_core::Error),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for bad input, 2 for an exceeded variable budget, 3 for a broken
    /// internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qnmf_core::Error::Budget { .. }) => 2,
            CliError::Internal(_) => 3,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
