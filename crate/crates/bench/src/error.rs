use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: arclp::Error,
    },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl BenchError {
    /// Errors caused by the input rather than by a solver run.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            BenchError::Io { .. }
                | BenchError::Parse { .. }
                | BenchError::Config { .. }
                | BenchError::Csv(_)
                | BenchError::Usage(_)
                | BenchError::Model {
                    source: arclp::Error::Unsupported(_)
                        | arclp::Error::Model(_)
                        | arclp::Error::Dimension(_),
                    ..
                }
        )
    }

    pub(crate) fn from_core(path: impl Into<PathBuf>, e: arclp::Error) -> Self {
        let path = path.into();
        match e {
            arclp::Error::Parse { line, message } => BenchError::Parse { path, line, message },
            arclp::Error::Io(source) => BenchError::Io { path, source },
            source => BenchError::Model { path, source },
        }
    }
}
