use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, token {token}: {msg}")]
    Parse { line: usize, token: usize, msg: String },
    #[error("range error: {0}")]
    Range(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Grid too coarse for the frequencies being sampled.
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("singular system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
