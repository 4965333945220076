use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown jump rule `{0}` (expected square, cube, pow:k, linear:k, odd, factorial, geom:p or explicit:[...])")]
    UnknownRule(String),
    #[error("invalid jump rule parameter: {0}")]
    InvalidRuleParameter(String),
    #[error("explicit jump list must be strictly increasing positive integers, got {0:?}")]
    InvalidExplicitJumps(Vec<u64>),
    #[error("query {query} is beyond the configured horizon {horizon}")]
    BeyondHorizon { query: u64, horizon: u64 },
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("alphabet size {0} exceeds the supported maximum of 64")]
    AlphabetTooLarge(usize),
    #[error("maximum length M must be at least 1")]
    ZeroLength,
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("tail tolerance {tolerance:e} not reached within {max_sites} sites (survival {survival:e})")]
    TailUnreachable {
        tolerance: f64,
        max_sites: usize,
        survival: f64,
    },
    #[error("invalid symbol sequence: {0}")]
    InvalidSequence(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
