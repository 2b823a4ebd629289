use thiserror::Error;

/// Error type shared across the engine.
#[derive(Debug, Error)]
pub enum SceneGenError {
    /// A precondition stated by an operation's contract was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A category with no fitted density was queried.
    #[error("category '{0}' has no trained model")]
    UntrainedCategory(String),

    /// Orientation was requested for a category whose orientation is
    /// rule-determined (Symmetric or Inside-Facing), not modeled.
    #[error("orientation of '{0}' is rule-determined, not modeled")]
    RuleDeterminedOrientation(String),

    /// Query feature vector does not match the model's column layout.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Thresholds baked into a model differ from the ones used for a query.
    #[error("threshold mismatch: model was trained with different thresholds")]
    ThresholdMismatch,

    #[error("unknown category '{0}'")]
    UnknownCategory(String),

    #[error("model format version {found} unsupported (expected major {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("model file checksum mismatch")]
    Checksum,

    #[error("model file truncated or malformed: {0}")]
    Truncated(String),

    /// No valid placement cell exists for the requested step.
    #[error("no valid cell for step {step} (category '{category}')")]
    NoValidCell { step: usize, category: String },

    #[error("scene generation rule unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("invalid scene record: {0}")]
    InvalidScene(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
