use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layer partition: {0}")]
    Partition(String),

    #[error("rejected input: {0}")]
    Input(String),

    #[error("layer count mismatch: expected {expected}, got {got}")]
    LayerMismatch { expected: usize, got: usize },

    #[error("non-finite flux trace at interface {interface}")]
    NonFiniteTrace { interface: usize },

    #[error("solver abort at step {step} (t = {time}): {reason} in cell {cell}")]
    SolverAbort {
        step: usize,
        time: f64,
        cell: usize,
        reason: String,
    },

    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config: {0}")]
    ConfigMissing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
