use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a function, e.g. a nonpositive intensity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular value: {0}")]
    Singular(String),

    /// Power index or expansion order not allowed for the geometry.
    #[error("restriction: {0}")]
    Restriction(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("underdetermined fit: {unknowns} unknowns but only {points} points")]
    Underdetermined { unknowns: usize, points: usize },

    #[error("accuracy target not met: {0}")]
    Accuracy(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by the caller's inputs rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Singular(_)
                | Error::Restriction(_)
                | Error::Validation(_)
                | Error::Underdetermined { .. }
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
