//! A-priori error model `E = Σ_j 𝓔_j` and its closed-form subdivision delta.

use crate::discretization::Discretization;
use crate::error::{ReachError, Result};
use crate::scalar::Scalar;

/// `𝓔_j`: `e^{LT}ρ_0/2` for `j = 0`, otherwise
/// `e^{L(T-t_j)}(e^{Lh_j}-1)(Ph_j + ρ_j/2 + ρ_j/(2Lh_j))`.
pub fn error_component<S: Scalar>(disc: &Discretization<S>, lipschitz: S, bound: S, j: usize) -> S {
    let horizon = disc.horizon();
    let rho = disc.resolutions();
    let two = S::of(2.0);
    if j == 0 {
        return (lipschitz * horizon).exp() * rho[0] / two;
    }
    let h = disc.step(j);
    let t = disc.nodes()[j];
    (lipschitz * (horizon - t)).exp()
        * (lipschitz * h).exp_m1()
        * (bound * h + rho[j] / two + rho[j] / (two * lipschitz * h))
}

/// All `n + 1` components.
pub fn error_components<S: Scalar>(disc: &Discretization<S>, lipschitz: S, bound: S) -> Vec<S> {
    (0..=disc.len())
        .map(|j| error_component(disc, lipschitz, bound, j))
        .collect()
}

pub fn error_total<S: Scalar>(disc: &Discretization<S>, lipschitz: S, bound: S) -> S {
    error_components(disc, lipschitz, bound).into_iter().sum()
}

/// `Σ_{j≤k} 𝓔_j` for every `k`, the bound on the distance at node `t_k`.
pub fn error_partial_sums<S: Scalar>(disc: &Discretization<S>, lipschitz: S, bound: S) -> Vec<S> {
    let mut acc = S::zero();
    error_components(disc, lipschitz, bound)
        .into_iter()
        .map(|e| {
            acc = acc + e;
            acc
        })
        .collect()
}

/// `E(ψ(disc, k)) - E(disc)` in closed form. Needs the coupling `ρ_j = 2LPh_j²`.
pub fn delta_error<S: Scalar>(disc: &Discretization<S>, lipschitz: S, bound: S, k: usize) -> Result<S> {
    let n = disc.len();
    if k > n {
        return Err(ReachError::IndexOutOfRange { index: k, max: n });
    }
    if !disc.is_coupled(lipschitz, bound) {
        return Err(ReachError::Precondition(
            "delta_error requires rho_j = 2LP h_j^2".into(),
        ));
    }
    let horizon = disc.horizon();
    if k == 0 {
        return Ok(-S::of(0.375) * (lipschitz * horizon).exp() * disc.resolutions()[0]);
    }
    let h = disc.step(k);
    let t = disc.nodes()[k];
    Ok(-(lipschitz * (horizon - t)).exp()
        * (lipschitz * h).exp_m1()
        * (bound * h + S::of(0.75) * lipschitz * bound * h * h))
}
