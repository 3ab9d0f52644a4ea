use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },
    #[error("site {site} outside clock window [{lo}, {hi}]")]
    OutOfWindow { site: i64, lo: i64, hi: i64 },
    #[error("truncation: {0}")]
    Truncation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid wall: {0}")]
    Wall(String),
    #[error("state space of {states} exceeds capacity {limit}")]
    Capacity { states: usize, limit: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("{0}")]
    Contract(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config { path: path.to_string(), msg: msg.into() }
}
