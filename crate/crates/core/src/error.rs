use thiserror::Error;

/// Errors raised by the coding, tampering and analysis layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NmcError {
    #[error("length mismatch: expected {expected} bits, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("generator matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("{what} too large for exhaustive evaluation: 2^{log2_size} exceeds 2^{log2_limit}")]
    TooLarge {
        what: &'static str,
        log2_size: usize,
        log2_limit: usize,
    },

    #[error("field modulus mismatch: {left:#b} vs {right:#b}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("no candidate found after {trials} trials")]
    NotFound { trials: u64 },

    #[error("invalid tampering function: {0}")]
    InvalidTamper(String),
}

pub type Result<T> = std::result::Result<T, NmcError>;
