use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "non-finite value in {param}{}{}",
        .instance.map(|i| format!(" at training instance {i}")).unwrap_or_default(),
        .context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default()
    )]
    NumericFailure {
        param: String,
        instance: Option<usize>,
        context: Option<String>,
    },

    #[error("model snapshot: {0}")]
    Snapshot(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Attaches the index of the training instance that produced a numeric failure.
    pub fn at_instance(self, index: usize) -> Self {
        match self {
            Error::NumericFailure { param, context, .. } => Error::NumericFailure {
                param,
                instance: Some(index),
                context,
            },
            other => other,
        }
    }

    /// Attaches a description of the run (method, seed) to a numeric failure.
    pub fn with_context(self, run: impl Into<String>) -> Self {
        match self {
            Error::NumericFailure { param, instance, .. } => Error::NumericFailure {
                param,
                instance,
                context: Some(run.into()),
            },
            other => other,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFailure { .. })
    }
}
