use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum GprError {
    /// A scalar argument is outside its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input carries no usable information (e.g. an all-zero B-scan).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Matrix / grid shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Two scans that must share a grid, channel, or frame do not.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// No sample survived the selection threshold.
    #[error("no signal: {0}")]
    NoSignal(String),

    /// Invalid scene, plan, or pipeline configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A file failed to parse; `location` names the offending row/column.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GprError {
    /// CLI exit code: 1 for validation errors, 2 for runtime/data errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            GprError::Domain(_)
            | GprError::DegenerateInput(_)
            | GprError::Dimension(_)
            | GprError::Alignment(_)
            | GprError::Config(_)
            | GprError::Parse { .. } => 1,
            GprError::NoSignal(_) | GprError::Io(_) | GprError::Json(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, GprError>;
