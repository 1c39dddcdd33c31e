use alloc::string::String;

/// Errors raised by kernels, conditioning and the decomposition samplers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    /// The state lies outside `S^h = {h > 0}`.
    #[error("state {state} is outside the support of h (h = 0)")]
    Domain { state: String },
    /// The conditioning weight vanished at a visited state.
    #[error("survival weight vanishes at visited state {state}")]
    ConditioningDegenerate { state: String },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    /// The h-trace ended before the detection policy could stop.
    #[error("trace of length {len} ends before the stopping index")]
    InsufficientTrace { len: usize },
    #[error("state-space enumeration exceeded cap of {cap} paths")]
    Resource { cap: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot decode state {input:?}: {reason}")]
    Codec { input: String, reason: String },
}

pub type Result<T> = core::result::Result<T, ChainError>;
