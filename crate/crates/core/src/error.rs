//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's inputs was violated.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Non-finite parameters were produced by an update step.
    #[error("divergence: non-finite parameters at agent {agent} on step {step}")]
    Divergence { agent: usize, step: u64 },

    /// Noise-constant estimation had no usable probe points.
    #[error("noise-constant estimation failed: {0}")]
    Estimation(String),

    /// Convergence-rate fitting had insufficient or degenerate input.
    #[error("rate fit failed: {0}")]
    Fit(String),

    /// A config file or descriptor string could not be resolved.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    IdxMagic { expected: u32, found: u32 },

    #[error("truncated IDX file: needed {needed} bytes, found {found}")]
    IdxTruncated { needed: usize, found: usize },

    #[error("IDX image/label count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for divergence, 3 for bad
    /// configuration or parameters, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } => 2,
            Error::Parameter(_) | Error::Config(_) => 3,
            _ => 1,
        }
    }
}
