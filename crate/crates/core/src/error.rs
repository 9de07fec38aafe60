use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The Lagrange bracket does not contain a root; the caller should fall
    /// back to exhaustive integer search.
    #[error("outside the large-d regime: {0}")]
    Regime(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::InvalidInput(_) | Error::Config(_) => 2,
            Error::Capacity(_)
            | Error::Domain(_)
            | Error::Regime(_)
            | Error::Overflow(_)
            | Error::NoConvergence(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
