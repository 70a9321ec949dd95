use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric parameter lies outside the domain where the quantity is defined.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    /// Inconsistent shapes: mismatched dimensions, malformed trees and the like.
    #[error("malformed structure: {0}")]
    Structure(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("function evaluation failed: {0}")]
    Evaluation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }
}
