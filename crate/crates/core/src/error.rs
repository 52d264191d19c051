use thiserror::Error;

/// Errors produced by the slice, cube, hypergeometric and decoder routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid slice domain: n = {n}, k = {k} (need 1 <= n and k <= n)")]
    InvalidDomain { n: u32, k: u32 },

    #[error("n = {0} exceeds the supported word width of 64 coordinates")]
    TooWide(u32),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("index {index} out of range for a domain of size {size}")]
    IndexOutOfRange { index: u64, size: u64 },

    #[error("value at position {0} is not finite")]
    NonFinite(usize),

    #[error("table is not Boolean at position {0}")]
    NotBoolean(usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ratio undefined: Pr[X = {0}] is zero")]
    ZeroProbability(i64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
