use std::path::{Path, PathBuf};

use frp_core::error::{InputError, MarketError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),

    #[error(transparent)]
    Market(#[from] MarketError),

    #[error("cannot write {path}: {message}")]
    Write { path: PathBuf, message: String },

    #[error("missing artifacts in {dir}: {}", .files.join(", "))]
    MissingArtifacts { dir: PathBuf, files: Vec<String> },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn write(path: &Path, e: impl ToString) -> Self {
        CliError::Write {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// 1 for bad input, 2 for a failed solve.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Market(MarketError::MissingRequirements(_) | MarketError::Dimension(_)) => 1,
            CliError::Market(_) => 2,
            _ => 1,
        }
    }
}
