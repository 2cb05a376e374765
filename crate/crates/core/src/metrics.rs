//! Normalized cumulative error/cost profiles and the relative estimator error.

use crate::error::{ReachError, Result};
use crate::euler::RunStats;
use crate::refine::{cost_components, error_components, CostModel};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Sigma<S> {
    /// `σ_E[i] = Σ_{j≤i} 𝓔_j / E`.
    pub error: Vec<S>,
    /// `σ_C[i] = Σ_{j≤min(i,n-1)} Ĉ_j / Ĉ`.
    pub cost: Vec<S>,
}

pub fn metric_sigma<S: Scalar>(stats: &RunStats<S>, lipschitz: S, bound: S) -> Sigma<S> {
    let components = error_components(&stats.disc, lipschitz, bound);
    let total: S = components.iter().copied().sum();
    let mut acc = S::zero();
    let error = components
        .iter()
        .map(|e| {
            acc = acc + *e;
            acc / total
        })
        .collect();
    let cost_total = S::of_count(stats.total_cost());
    let mut acc = 0u64;
    let mut cost: Vec<S> = stats
        .cost_exact
        .iter()
        .map(|c| {
            acc += c;
            S::of_count(acc) / cost_total
        })
        .collect();
    cost.push(S::one());
    Sigma { error, cost }
}

/// `δ_C = Σ_j |𝓒_j - Ĉ_j| / Ĉ`, with `𝓒` evaluated by the model that planned the run.
pub fn metric_delta_cost<S: Scalar>(stats: &RunStats<S>, model: &CostModel<S>) -> Result<S> {
    let total = stats.total_cost();
    if total == 0 {
        return Err(ReachError::InvalidInput("run has zero cost".into()));
    }
    let estimated = cost_components(&stats.disc, model);
    let deviation: S = estimated
        .iter()
        .zip(&stats.cost_exact)
        .map(|(c, exact)| (*c - S::of_count(*exact)).abs())
        .sum();
    Ok(deviation / S::of_count(total))
}
