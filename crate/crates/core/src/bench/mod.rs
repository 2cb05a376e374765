//! Experiment harness behind the `setreach` binary: configuration, runs, and
//! the text/CSV artifacts they leave on disk.

pub mod config;
pub mod experiment;
pub mod output;
pub mod selftest;

use thiserror::Error;

use crate::error::ReachError;
use crate::refine::AdaptiveFailure;

pub use config::{ExperimentConfig, SystemKind};
pub use experiment::{
    compare, emit_figure_data, run_adaptive, run_uniform, sweep, AdaptiveReport, CellStatus, Comparison, ComparisonRow,
    UniformReport,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Reach(#[from] ReachError),
    #[error(transparent)]
    Adaptive(Box<AdaptiveFailure<f64>>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl BenchError {
    /// 2 config, 3 resource cap, 4 invariant violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Reach(ReachError::InvalidInput(_) | ReachError::DimensionMismatch { .. }) => 2,
            Self::Reach(ReachError::CapExceeded { .. }) => 3,
            Self::Reach(ReachError::Invariant(_) | ReachError::Precondition(_)) => 4,
            Self::Adaptive(failure) => BenchError::Reach(failure.error.clone()).exit_code(),
            Self::Reach(_) | Self::Io(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(BenchError::Config("x".into()).exit_code(), 2);
        let cap = ReachError::CapExceeded {
            step: 1,
            steps: 2,
            points: 10,
            cap: 5,
        };
        assert_eq!(BenchError::from(cap).exit_code(), 3);
        assert_eq!(BenchError::from(ReachError::Invariant("x".into())).exit_code(), 4);
        assert_eq!(BenchError::from(ReachError::Unsupported("x".into())).exit_code(), 1);
    }
}
