use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("simulation diverged at sample {index} (t = {time})")]
    Divergence { index: usize, time: f64 },

    #[error("precision matrix is not positive definite (after {attempts} jitter attempts)")]
    NotPositiveDefinite { attempts: usize },

    #[error("degenerate noise posterior: residual sum of squares is zero with {n} samples; add measurement noise or a sigma^2 floor")]
    DegenerateNoise { n: usize },

    #[error("chain diverged at iteration {iteration}: non-finite {parameter}")]
    ChainDiverged { iteration: usize, parameter: &'static str },

    #[error("target series is constant; NMSE undefined")]
    UndefinedVariance,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Numerical failures as opposed to usage or configuration mistakes.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::DegenerateNoise { .. }
                | Error::ChainDiverged { .. }
                | Error::UndefinedVariance
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
