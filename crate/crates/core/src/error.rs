use thiserror::Error;

use crate::seq::SpecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),

    #[error("unknown builtin sequence `{0}`")]
    UnknownBuiltin(String),

    #[error("arithmetic overflow while evaluating {0}")]
    Overflow(String),

    #[error("index {0} does not fit the evaluator's 128-bit index range")]
    IndexTooLarge(String),

    #[error("prefix of length {prefix_len} is too short for factors of length {n}")]
    WindowTooSmall { n: usize, prefix_len: usize },

    #[error("base mismatch: expected base {expected}, got {got}")]
    BaseMismatch { expected: u32, got: u32 },

    #[error("invalid b-adic point: {0}")]
    InvalidPoint(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("limit function undefined at {0}")]
    Domain(String),

    #[error("exact evaluation unavailable: {0}")]
    ExactPathUnavailable(String),

    #[error("degenerate profile: alpha ({alpha}) must exceed beta ({beta})")]
    DegenerateProfile { alpha: String, beta: String },

    #[error("families are not at consecutive levels ({parent} -> {child}) or differ in kind")]
    LevelMismatch { parent: u32, child: u32 },

    #[error("resource guard: {requested} cells requested, limit is {limit}")]
    ResourceGuard { requested: u128, limit: u128 },

    #[error("need at least 3 rows to fit a slope, got {0}")]
    InsufficientRows(usize),

    #[error("sequence vanishes on the whole estimation window")]
    AllZero,

    #[error("sequence is not strictly increasing at n = {n} ({prev} -> {next})")]
    NotIncreasing { n: u64, prev: i128, next: i128 },

    #[error("sequence does not look syndetic: {0}")]
    NotSyndetic(String),

    #[error("tail identity check failed at n = {0}")]
    TailIdentity(u128),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
