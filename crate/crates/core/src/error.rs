use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mcs table error at row {row}: {msg}")]
    TableRow { row: usize, msg: String },

    #[error("mcs table error: {0}")]
    Table(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scoring error: {0}")]
    Scoring(String),

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
