use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("field order {q}^{m} exceeds the 2^40 size budget")]
    FieldTooLarge { q: u64, m: usize },

    #[error("element does not belong to this field")]
    FieldMismatch,

    #[error("inversion of zero")]
    ZeroInverse,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("insufficient rank: have {rank}, need {needed}")]
    InsufficientRank { rank: usize, needed: usize },

    #[error("inconsistent data at evaluation {index}")]
    InconsistentData { index: usize },

    #[error("design violation: subset {subset:?} lies in {count} blocks, expected {expected}")]
    DesignViolation {
        subset: Vec<usize>,
        count: usize,
        expected: usize,
    },

    #[error("rank accumulation is not uniform over {size}-subsets: {low:?} vs {high:?}")]
    NonUniformProfile {
        size: usize,
        low: Vec<usize>,
        high: Vec<usize>,
    },

    #[error("pattern cap exceeded: {needed} erasure patterns, cap {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("unrepairable: {0}")]
    Unrepairable(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameters(msg.into())
}
