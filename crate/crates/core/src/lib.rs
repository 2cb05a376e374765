//! Guaranteed-error reachable sets of differential inclusions `x' ∈ F(x)`.
//!
//! The reachable tube is approximated with a fully discrete Euler scheme on
//! per-node lattices `ρ_k Z^d`. Two ways of choosing the space-time
//! discretization are provided:
//!
//! - [`algorithm_uniform`]: the coarsest uniform discretization whose a-priori
//!   error bound is below a tolerance;
//! - [`algorithm_adaptive`]: greedy refinement that repeatedly subdivides the
//!   time interval with the best predicted error decrease per predicted extra
//!   lattice point, re-calibrating its cost model after each Euler run.
//!
//! All numerics are generic over [`Scalar`] (`f32`/`f64`); the `*64` aliases at
//! the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod bench;
pub mod discretization;
pub mod error;
pub mod euler;
pub mod lattice;
pub mod metrics;
pub mod refine;
pub mod scalar;
pub mod systems;

pub use discretization::{random_conforming, Discretization, DyadicLayout};
pub use error::{ReachError, Result};
pub use euler::{euler_run, EulerOptions, RunRecord, RunStats};
pub use lattice::{hausdorff_points, hausdorff_to_box, project_box, union_into, LatticePoint, LatticeSet};
pub use metrics::{metric_delta_cost, metric_sigma, Sigma};
pub use refine::{
    algorithm_adaptive, algorithm_uniform, cost_component, cost_estimate, default_ladder, delta_cost, delta_error,
    error_component, error_partial_sums, error_total, greedy_select, uniform_step_count, AdaptiveFailure,
    AdaptiveOutcome, CostModel, GreedyChoice, RefinementTrace, UniformOutcome, VolumeSplines,
};
pub use scalar::Scalar;
pub use systems::{make_exponential_system, make_michaelis_menten, IntervalBox, Rhs, SystemSpec};

pub type IntervalBox64 = IntervalBox<f64>;
pub type SystemSpec64 = SystemSpec<f64>;
pub type Discretization64 = Discretization<f64>;
pub type LatticeSet64 = LatticeSet<f64>;
pub type RunRecord64 = RunRecord<f64>;
pub type VolumeSplines64 = VolumeSplines<f64>;
pub type CostModel64 = CostModel<f64>;
pub type RefinementTrace64 = RefinementTrace<f64>;

pub type IntervalBox32 = IntervalBox<f32>;
pub type SystemSpec32 = SystemSpec<f32>;
pub type Discretization32 = Discretization<f32>;
pub type RunRecord32 = RunRecord<f32>;
