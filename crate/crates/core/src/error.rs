use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("target infected fraction {target} unreachable; maximum achievable is {max_fraction:.4}")]
    Unreachable { target: f64, max_fraction: f64 },

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("format version mismatch: found {found}, expected {expected}")]
    Version { found: u16, expected: u16 },

    #[error("content hash mismatch: file was built for {found}, expected {expected}")]
    HashMismatch { found: String, expected: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: non-finite loss")]
    Diverged { epoch: usize, batch: usize },

    #[error("estimator needs a probability distribution, got rank scores")]
    NotProbabilistic,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
