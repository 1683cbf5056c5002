use thiserror::Error;

/// Errors raised by the algebraic and numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode index: {0}")]
    InvalidMode(String),

    #[error("mode {mode} does not act on any factor of this state space")]
    SpeciesMismatch { mode: String },

    #[error("cutoff {cutoff} too small: {reason}")]
    CutoffTooSmall { cutoff: String, reason: String },

    #[error("operator grading violated: {0}")]
    Grading(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("expression outside the supported evaluation class: {0}")]
    Evaluation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid fusion ring: {0}")]
    FusionRing(String),

    #[error("numerical fault: {0}")]
    Numerical(String),

    #[error("no plateau: {0}")]
    NoPlateau(String),

    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
