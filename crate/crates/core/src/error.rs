use thiserror::Error;

/// Errors raised by the construction and verification routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension n must be at least 1")]
    ZeroDimension,
    #[error("explicit materialization requested for n = {n}, above the limit {limit}")]
    ExplicitTooLarge { n: usize, limit: usize },
    #[error("row indices are not addressable for n = {n} (limit {limit})")]
    RowsNotAddressable { n: usize, limit: usize },
    #[error("operation requires an explicit measure")]
    NotExplicit,
    #[error("{what}: expected length {expected}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{op} is guarded to n <= {limit}, got n = {n}")]
    GuardExceeded {
        op: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("combination not evaluable at n = {n}: {reason}")]
    NotEvaluable { n: usize, reason: String },
    #[error("input stream exhausted after {selected} of {wanted} selections")]
    StreamExhausted { selected: usize, wanted: usize },
    #[error("generator span is rank deficient at coordinate {coordinate}")]
    RankDeficient { coordinate: usize },
    #[error("horizon mismatch: need at least {needed}, got {got}")]
    HorizonMismatch { needed: usize, got: usize },
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degenerate section: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
