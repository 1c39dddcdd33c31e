use pathsplit_core::ChainError;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type RunResult<T> = std::result::Result<T, RunError>;

impl RunError {
    /// 2 for anything the user can fix in the config or invocation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Chain(
                ChainError::Precondition(_) | ChainError::Unsupported(_) | ChainError::Codec { .. },
            ) => 2,
            _ => 1,
        }
    }

    /// Stable machine-readable reason tag.
    pub fn reason(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Chain(e) => match e {
                ChainError::Domain { .. } => "domain",
                ChainError::ConditioningDegenerate { .. } => "conditioning-degenerate",
                ChainError::Unsupported(_) => "unsupported",
                ChainError::InsufficientTrace { .. } => "insufficient-trace",
                ChainError::Resource { .. } => "resource",
                ChainError::Precondition(_) => "precondition",
                ChainError::Numeric(_) => "numeric",
                ChainError::Codec { .. } => "codec",
            },
            RunError::Verification(_) => "verification",
            RunError::Io(_) => "io",
            RunError::Json(_) => "json",
            RunError::Csv(_) => "csv",
        }
    }
}
