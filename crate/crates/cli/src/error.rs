use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI run, grouped by the exit status it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("nothing to do: {0}")]
    Empty(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Empty(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, err: impl ToString) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Classifies a library error raised while handling `path`. Unreadable or
    /// undecodable files are I/O failures; everything else is a problem with
    /// the requested parameters or the input content.
    pub(crate) fn from_core(path: impl Into<PathBuf>, err: sketchseg::Error) -> Self {
        use sketchseg::Error as E;
        match err {
            E::FileNotFound(_) | E::Io(_) | E::Image(_) | E::UnsupportedFormat(_) | E::Csv(_) => {
                CliError::io(path, err)
            }
            E::EmptyInput => CliError::Empty(err.to_string()),
            other => CliError::Config(format!("{}: {other}", path.into().display())),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
