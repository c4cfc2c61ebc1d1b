//! Error surface for the pipeline, mapped onto process exit codes:
//! 1 for usage problems, 2 for data problems, 3 for internal faults.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Image(#[from] radaug_core::image::ImageError),

    #[error(transparent)]
    Enhance(#[from] radaug_core::enhance::EnhanceError),

    #[error(transparent)]
    Augment(#[from] radaug_core::augment::AugmentError),

    #[error(transparent)]
    Train(#[from] radaug_core::trainer::TrainError),

    #[error(transparent)]
    Metric(#[from] radaug_core::metrics::MetricError),

    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}
