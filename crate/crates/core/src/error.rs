use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("context error: {0}")]
    Context(String),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Domain(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("state space cap exceeded: {0}")]
    StateSpace(String),
    #[error("rewrite fuel exhausted after {0} steps")]
    FuelExhausted(u64),
    #[error("invariant breach: {0}")]
    Invariant(String),
}

impl Error {
    /// 1 for domain errors, 3 for internal invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::FuelExhausted(_) | Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
