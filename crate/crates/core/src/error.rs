use thiserror::Error;

/// Errors raised by the toolkit. Every variant is a usage or input error;
/// numeric work is exact and cannot fail.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,
    #[error("invalid sign character {ch:?} at position {pos} (expected '+' or '-')")]
    InvalidSign { ch: char, pos: usize },
    #[error("lag {lag} out of range for length {len}")]
    LagOutOfRange { lag: usize, len: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("length {len} is not divisible by 4")]
    NotMultipleOfFour { len: usize },
    #[error("block sequence must have an even number of blocks, at least 2 (got {len})")]
    BadBlockCount { len: usize },
    #[error("invalid block {text:?} at position {pos} (expected two characters from '+'/'-')")]
    InvalidBlock { text: String, pos: usize },
    #[error("block {index} is odd; symmetry is only defined for even blocks")]
    OddBlock { index: usize },
    #[error("index pair ({first},{second}) is not an even-even pair")]
    NotEvenPair { first: usize, second: usize },
    #[error("start block {index} is symmetric")]
    SymmetricStart { index: usize },
    #[error("matching book is invalid: {0}")]
    InvalidBook(String),
    #[error("line {line}: {message}")]
    MatchingSyntax { line: usize, message: String },
    #[error("half-length {n} outside the supported range 1..=6")]
    HalfLengthOutOfRange { n: usize },
    #[error("search order {order} must be a positive multiple of 4")]
    BadOrder { order: usize },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("ledger: {0}")]
    Ledger(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
