use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Core(#[from] mtsindy::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error("scenario '{label}', replicate {replicate}: {source}")]
    Scenario {
        label: String,
        replicate: usize,
        #[source]
        source: Box<ExperimentError>,
    },
}

impl ExperimentError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn file(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::File { path: path.into(), message: message.to_string() }
    }

    pub(crate) fn in_scenario(self, label: &str, replicate: usize) -> Self {
        Self::Scenario { label: label.to_owned(), replicate, source: Box::new(self) }
    }

    /// Exit status for the command-line tool: 2 for numerical failures,
    /// 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) if e.is_numerical() => 2,
            Self::Scenario { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
