use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pool: item {item} is outside 1..={n}")]
    InvalidPool { item: usize, n: usize },

    #[error("a stage must contain at least one test")]
    EmptyStage,

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid sizes: {0}")]
    InvalidSizes(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed instance: {0}")]
    MalformedInstance(String),

    /// A stage produced no positive pool where one is guaranteed for any
    /// valid instance. Signals oracle misuse (e.g. wrong `m`).
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("disjunctness verification too large: n*C(n,u+v) = {work} exceeds cap {cap}")]
    VerificationTooLarge { work: u128, cap: u128 },

    #[error("attempt cap of {cap} exceeded without a certified separation")]
    AttemptCapExceeded { cap: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
