//! Error model, cost estimator, greedy subdivision and the two top-level algorithms.

mod algorithms;
mod cost;
mod error_model;
mod greedy;

pub use algorithms::{
    algorithm_adaptive, algorithm_uniform, default_ladder, uniform_condition, uniform_step_count, AdaptiveFailure,
    AdaptiveOptions, AdaptiveOutcome, IterationRecord, RefinementTrace, ThresholdRecord, UniformOutcome,
};
pub use cost::{cost_component, cost_components, cost_estimate, delta_cost, CostModel, VolumeSplines};
pub use error_model::{delta_error, error_component, error_components, error_partial_sums, error_total};
pub use greedy::{greedy_select, GreedyChoice};
