use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed pair code {0:?}: no terminating 1-marker at an even offset")]
    MalformedPairCode(String),

    #[error("cannot pad to length {requested}: at least {needed} bits are required")]
    PadTooSmall { needed: usize, requested: usize },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("length mismatch: expected {expected} bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("enumeration budget of {budget_ms} ms exceeded")]
    BudgetExceeded { budget_ms: u64 },

    #[error("search length {requested} exceeds the configured guard {guard}")]
    GuardExceeded { requested: usize, guard: usize },

    #[error("domain too large for exhaustive evaluation: {0}")]
    DomainTooLarge(String),

    #[error("strategy of {side} exceeded runtime bound {bound} at n = {n}")]
    RuntimeBoundExceeded { side: &'static str, n: usize, bound: u64 },

    #[error("embedded pair needs {needed} bits but the padding target is {target}")]
    EmbeddingTooLong { needed: usize, target: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Budget-type failures, as opposed to validation failures.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::DomainTooLarge(_) | Error::GuardExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
