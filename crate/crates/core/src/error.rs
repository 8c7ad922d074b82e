use thiserror::Error;

/// Errors shared across the workbench modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("oracle undefined at {0}")]
    OracleUndefined(u64),
    #[error("query requires a certificate that is not available: {0}")]
    Uncertified(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("level {0} outside the configured bound {1}")]
    LevelOutOfRange(u64, u64),
    #[error("empty input where a nonempty collection is required")]
    EmptyInput,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("prefix of length {have} too short; need at least {need} bits")]
    PrefixTooShort { have: usize, need: usize },
    #[error("ordinal out of the supported range: {0}")]
    OrdinalRange(String),
    #[error("arguments inconsistent: {0}")]
    Inconsistent(String),
    #[error("order has no least element: {0}")]
    NoLeastElement(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
