//! Spline-calibrated cost estimator `C = Σ_j 𝓒_j` and its subdivision delta.

use crate::discretization::Discretization;
use crate::error::{ReachError, Result};
use crate::euler::RunStats;
use crate::scalar::Scalar;

/// Piecewise-linear interpolants of the surrogate volumes `v̂_R`, `v̂_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeSplines<S> {
    nodes: Vec<S>,
    vr: Vec<S>,
    vf: Vec<S>,
}

impl<S: Scalar> VolumeSplines<S> {
    pub fn new(nodes: Vec<S>, vr: Vec<S>, vf: Vec<S>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(ReachError::InvalidInput("splines need at least one node".into()));
        }
        for v in [&vr, &vf] {
            if v.len() != nodes.len() {
                return Err(ReachError::DimensionMismatch {
                    expected: nodes.len(),
                    found: v.len(),
                });
            }
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ReachError::InvalidInput(
                "spline nodes must be strictly increasing".into(),
            ));
        }
        if vr.iter().chain(&vf).any(|v| !(*v > S::zero()) || !v.is_finite()) {
            return Err(ReachError::InvalidInput("surrogate volumes must be positive".into()));
        }
        Ok(Self { nodes, vr, vf })
    }

    /// Constant splines, handy for tests and as a neutral model.
    pub fn constant(horizon: S, vr: S, vf: S) -> Result<Self> {
        Self::new(vec![S::zero(), horizon], vec![vr, vr], vec![vf, vf])
    }

    pub fn from_stats(stats: &RunStats<S>) -> Result<Self> {
        Self::new(stats.disc.nodes().to_vec(), stats.vhat_r.clone(), stats.vhat_f.clone())
    }

    pub fn nodes(&self) -> &[S] {
        &self.nodes
    }

    fn eval(&self, values: &[S], t: S) -> S {
        let last = self.nodes.len() - 1;
        if t <= self.nodes[0] {
            return values[0];
        }
        if t >= self.nodes[last] {
            return values[last];
        }
        let i = self.nodes.partition_point(|&x| x <= t) - 1;
        if self.nodes[i] == t {
            return values[i];
        }
        let w = (t - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        values[i] * (S::one() - w) + values[i + 1] * w
    }

    pub fn eval_r(&self, t: S) -> S {
        self.eval(&self.vr, t)
    }

    pub fn eval_f(&self, t: S) -> S {
        self.eval(&self.vf, t)
    }

    /// `V(t) = v_R(t)·v_F(t)`.
    pub fn eval_product(&self, t: S) -> S {
        self.eval_r(t) * self.eval_f(t)
    }
}

/// Splines plus the effective dimensions they are used with.
#[derive(Clone, Debug, PartialEq)]
pub struct CostModel<S> {
    pub splines: VolumeSplines<S>,
    pub dim_r: u32,
    pub dim_f: u32,
}

impl<S: Scalar> CostModel<S> {
    pub fn new(splines: VolumeSplines<S>, dim_r: u32, dim_f: u32) -> Self {
        Self { splines, dim_r, dim_f }
    }

    pub fn from_stats(stats: &RunStats<S>, dim_r: u32, dim_f: u32) -> Result<Self> {
        Ok(Self::new(VolumeSplines::from_stats(stats)?, dim_r, dim_f))
    }
}

/// `𝓒_j = v_R(t_j)/ρ_j^{d_R} · v_F(t_j)·h_{j+1}^{d_F}/ρ_{j+1}^{d_F}` for `j ∈ [0, n-1]`.
pub fn cost_component<S: Scalar>(disc: &Discretization<S>, model: &CostModel<S>, j: usize) -> S {
    let t = disc.nodes()[j];
    let rho = disc.resolutions();
    model.splines.eval_r(t) / rho[j].upow(model.dim_r)
        * model.splines.eval_f(t)
        * (disc.step(j + 1) / rho[j + 1]).upow(model.dim_f)
}

pub fn cost_components<S: Scalar>(disc: &Discretization<S>, model: &CostModel<S>) -> Vec<S> {
    (0..disc.len()).map(|j| cost_component(disc, model, j)).collect()
}

pub fn cost_estimate<S: Scalar>(disc: &Discretization<S>, model: &CostModel<S>) -> S {
    cost_components(disc, model).into_iter().sum()
}

/// `C(ψ(disc, k)) - C(disc)` in closed form.
pub fn delta_cost<S: Scalar>(disc: &Discretization<S>, model: &CostModel<S>, k: usize) -> Result<S> {
    let n = disc.len();
    if k > n {
        return Err(ReachError::IndexOutOfRange { index: k, max: n });
    }
    let (dr, df) = (model.dim_r, model.dim_f);
    let v = |t: S| model.splines.eval_product(t);
    let rho = disc.resolutions();
    let t = disc.nodes();
    let (two, four) = (S::of(2.0), S::of(4.0));
    let grow_r = four.upow(dr) - S::one();
    let grow_f = two.upow(df) - S::one();
    if k == 0 {
        return Ok(v(t[0]) * grow_r / rho[0].upow(dr) * (disc.step(1) / rho[1]).upow(df));
    }
    let h = disc.step(k);
    let inserted = v(disc.midpoint(k)) * (two * h / rho[k]).upow(df) * (four / rho[k]).upow(dr);
    let left = v(t[k - 1]) * grow_f / rho[k - 1].upow(dr) * (h / rho[k]).upow(df);
    if k == n {
        return Ok(inserted + left);
    }
    let right = v(t[k]) * grow_r / rho[k].upow(dr) * (disc.step(k + 1) / rho[k + 1]).upow(df);
    Ok(inserted + right + left)
}
