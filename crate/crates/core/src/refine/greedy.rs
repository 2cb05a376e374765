//! Greedy choice of the next subdivision index.

use crate::discretization::Discretization;
use crate::error::{ReachError, Result};
use crate::scalar::Scalar;

use super::cost::{delta_cost, CostModel};
use super::error_model::delta_error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyChoice<S> {
    pub index: usize,
    pub delta_e: S,
    pub delta_c: S,
    /// `-ΔE/ΔC`.
    pub ratio: S,
}

/// Index with the largest `-ΔE/ΔC`; the smallest index wins ties.
pub fn greedy_select<S: Scalar>(
    disc: &Discretization<S>,
    lipschitz: S,
    bound: S,
    model: &CostModel<S>,
) -> Result<GreedyChoice<S>> {
    if disc.is_empty() {
        return Err(ReachError::Precondition("greedy_select needs n >= 1".into()));
    }
    let candidates = (0..=disc.len())
        .map(|k| {
            let delta_e = delta_error(disc, lipschitz, bound, k)?;
            let delta_c = delta_cost(disc, model, k)?;
            let ratio = -delta_e / delta_c;
            if !ratio.is_finite() {
                return Err(ReachError::Invariant(format!("non-finite greedy ratio at index {k}")));
            }
            Ok(GreedyChoice {
                index: k,
                delta_e,
                delta_c,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<S> = candidates.iter().map(|c| c.ratio).collect();
    let best = argmax_first(&ratios).expect("at least two candidates");
    Ok(candidates[best])
}

/// First index of the maximum.
fn argmax_first<S: Scalar>(ratios: &[S]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in ratios.iter().enumerate() {
        if best.is_none_or(|b| *r > ratios[b]) {
            best = Some(i);
        }
    }
    best
}
