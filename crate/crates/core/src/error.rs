use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid allocation: {0}")]
    Allocation(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("episode is already terminal")]
    TerminalState,

    #[error("action index {index} out of range for table of size {size}")]
    ActionOutOfRange { index: usize, size: usize },

    #[error("node {0} is already expanded")]
    AlreadyExpanded(usize),

    #[error("oracle budget exceeded: {leaves} leaves > budget {budget}")]
    OracleBudget { leaves: u128, budget: u128 },

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    RawIo(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
