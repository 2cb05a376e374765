use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReachError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range [0, {max}]")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The lattice points computed by a run (summed over its steps so far) exceed the cap.
    #[error("lattice point cap exceeded at step {step} of {steps}: {points} points > cap {cap}")]
    CapExceeded {
        step: usize,
        steps: usize,
        points: u128,
        cap: u64,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = ReachError> = std::result::Result<T, E>;
