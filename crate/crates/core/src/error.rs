use thiserror::Error;

/// Error type shared by all library operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("length error: {0}")]
    Length(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("table error: {0}")]
    Table(String),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("precondition violation: {0}")]
    Precondition(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
