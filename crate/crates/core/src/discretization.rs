//! Non-uniform space-time discretizations `(h, t, ρ)` and the subdivision operator.
//!
//! Discretizations reached from [`Discretization::initial`] by repeated
//! [`Discretization::subdivide`] carry a [`DyadicLayout`]: every step is
//! `h_j = T·2^{-ℓ_j}`, every node is an integer number of ticks of `T·2^{-100}`,
//! and every resolution is `ρ_j = ρ_base·4^{-q_j}` with `ρ_base = 2LPT²`. The
//! floating-point arrays are always derived from those integers, so the
//! structural invariants can be checked exactly.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{ReachError, Result};
use crate::scalar::Scalar;

/// Nodes are stored in units of `T·2^{-TICK_BITS}`.
pub const TICK_BITS: u32 = 100;

/// Exact integer description of a dyadic discretization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicLayout {
    /// `h_j = T·2^{-levels[j-1]}`, one entry per interval.
    pub levels: Vec<u32>,
    /// `t_j = T·ticks[j]·2^{-TICK_BITS}`.
    pub ticks: Vec<u128>,
    /// `ρ_j = ρ_base·4^{-quarterings[j]}`.
    pub quarterings: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discretization<S> {
    horizon: S,
    steps: Vec<S>,
    nodes: Vec<S>,
    resolutions: Vec<S>,
    /// `2LPT²` for dyadic layouts.
    rho_base: Option<S>,
    dyadic: Option<DyadicLayout>,
}

fn tick_to_time<S: Scalar>(horizon: S, tick: u128) -> S {
    if tick == 0 {
        return S::zero();
    }
    let tz = tick.trailing_zeros();
    let odd = S::from_u128(tick >> tz).expect("tick representable");
    horizon * odd * S::pow2(tz as i32 - TICK_BITS as i32)
}

impl<S: Scalar> Discretization<S> {
    /// One interval: `h = (T)`, `t = (0, T)`, `ρ = (2LPT², 2LPT²)`.
    pub fn initial(horizon: S, lipschitz: S, bound: S) -> Result<Self> {
        if !(horizon > S::zero()) || !(lipschitz > S::zero()) || !(bound > S::zero()) {
            return Err(ReachError::InvalidInput(format!(
                "initial discretization needs T, L, P > 0 (got {horizon}, {lipschitz}, {bound})"
            )));
        }
        let rho_base = S::of(2.0) * lipschitz * bound * horizon * horizon;
        Ok(Self {
            horizon,
            steps: vec![horizon],
            nodes: vec![S::zero(), horizon],
            resolutions: vec![rho_base, rho_base],
            rho_base: Some(rho_base),
            dyadic: Some(DyadicLayout {
                levels: vec![0],
                ticks: vec![0, 1u128 << TICK_BITS],
                quarterings: vec![0, 0],
            }),
        })
    }

    /// `n` equal steps `T/n` with uniform resolution `T²/n²`.
    pub fn uniform(horizon: S, n: usize) -> Result<Self> {
        if n == 0 || !(horizon > S::zero()) {
            return Err(ReachError::InvalidInput(format!(
                "uniform discretization needs n >= 1 and T > 0 (got n={n}, T={horizon})"
            )));
        }
        let nf = S::of_usize(n);
        let h = horizon / nf;
        let rho = h * h;
        let nodes = (0..=n).map(|k| horizon * S::of_usize(k) / nf).collect();
        Ok(Self {
            horizon,
            steps: vec![h; n],
            nodes,
            resolutions: vec![rho; n + 1],
            rho_base: None,
            dyadic: None,
        })
    }

    /// Arbitrary arrays; `t` must start at 0 and end at `T`.
    pub fn from_arrays(horizon: S, steps: Vec<S>, nodes: Vec<S>, resolutions: Vec<S>) -> Result<Self> {
        let n = steps.len();
        if n == 0 {
            return Err(ReachError::InvalidInput("at least one step required".into()));
        }
        if nodes.len() != n + 1 {
            return Err(ReachError::DimensionMismatch {
                expected: n + 1,
                found: nodes.len(),
            });
        }
        if resolutions.len() != n + 1 {
            return Err(ReachError::DimensionMismatch {
                expected: n + 1,
                found: resolutions.len(),
            });
        }
        if steps
            .iter()
            .chain(&resolutions)
            .any(|v| !(*v > S::zero()) || !v.is_finite())
        {
            return Err(ReachError::InvalidInput(
                "steps and resolutions must be positive".into(),
            ));
        }
        if nodes[0] != S::zero() || nodes[n] != horizon {
            return Err(ReachError::InvalidInput("nodes must run from 0 to T".into()));
        }
        Ok(Self {
            horizon,
            steps,
            nodes,
            resolutions,
            rho_base: None,
            dyadic: None,
        })
    }

    /// Number of intervals `n`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    /// `h_1..h_n` (stored 0-based: `steps()[j-1] = h_j`).
    pub fn steps(&self) -> &[S] {
        &self.steps
    }

    /// `h_j` for `j ∈ [1, n]`.
    pub fn step(&self, j: usize) -> S {
        self.steps[j - 1]
    }

    pub fn nodes(&self) -> &[S] {
        &self.nodes
    }

    pub fn resolutions(&self) -> &[S] {
        &self.resolutions
    }

    pub fn dyadic(&self) -> Option<&DyadicLayout> {
        self.dyadic.as_ref()
    }

    pub fn rho_base(&self) -> Option<S> {
        self.rho_base
    }

    /// `t_j - h_j/2` for `j ∈ [1, n]`, the node `subdivide(j)` inserts.
    pub fn midpoint(&self, j: usize) -> S {
        match &self.dyadic {
            Some(layout) => {
                let half = 1u128 << (TICK_BITS - layout.levels[j - 1] - 1);
                tick_to_time(self.horizon, layout.ticks[j] - half)
            }
            None => self.nodes[j] - self.steps[j - 1] / S::of(2.0),
        }
    }

    /// Subdivision `ψ[h, t, ρ; j]`: `j = 0` quarters `ρ_0`; `j ≥ 1` halves `h_j`,
    /// inserts `t_j - h_j/2` and replaces `ρ_j` by two copies of `ρ_j/4`.
    pub fn subdivide(&self, j: usize) -> Result<Self> {
        let n = self.len();
        if j > n {
            return Err(ReachError::IndexOutOfRange { index: j, max: n });
        }
        let mut next = self.clone();
        if let (Some(layout), Some(base)) = (next.dyadic.as_mut(), self.rho_base) {
            if j == 0 {
                layout.quarterings[0] += 1;
                next.resolutions[0] = base * S::pow2(-2 * layout.quarterings[0] as i32);
                return Ok(next);
            }
            let level = layout.levels[j - 1] + 1;
            if level >= TICK_BITS {
                return Err(ReachError::InvalidInput(format!(
                    "refinement depth exceeds 2^-{TICK_BITS}·T at interval {j}"
                )));
            }
            let mid_tick = layout.ticks[j] - (1u128 << (TICK_BITS - level));
            let q = layout.quarterings[j] + 1;
            layout.levels.splice(j - 1..j, [level, level]);
            layout.ticks.insert(j, mid_tick);
            layout.quarterings.splice(j..=j, [q, q]);
            let h = self.horizon * S::pow2(-(level as i32));
            let rho = base * S::pow2(-2 * q as i32);
            next.steps.splice(j - 1..j, [h, h]);
            next.nodes.insert(j, tick_to_time(self.horizon, mid_tick));
            next.resolutions.splice(j..=j, [rho, rho]);
            return Ok(next);
        }
        let four = S::of(4.0);
        if j == 0 {
            next.resolutions[0] = self.resolutions[0] / four;
            return Ok(next);
        }
        let h = self.steps[j - 1] / S::of(2.0);
        let rho = self.resolutions[j] / four;
        next.steps.splice(j - 1..j, [h, h]);
        next.nodes.insert(j, self.midpoint(j));
        next.resolutions.splice(j..=j, [rho, rho]);
        Ok(next)
    }

    /// True when `ρ_j = 2LP·h_j²` (evaluated in that association order) for all `j ≥ 1`.
    pub fn is_coupled(&self, lipschitz: S, bound: S) -> bool {
        let c = S::of(2.0) * lipschitz * bound;
        (1..=self.len()).all(|j| {
            let h = self.steps[j - 1];
            let expected = c * h * h;
            let rho = self.resolutions[j];
            (rho - expected).abs() <= S::of(1e-12) * expected
        })
    }

    /// Verifies the structural facts every refinement path must keep:
    /// `t = Σ₊h` (floating drift ≤ n ulp), exact coupling, dyadic steps and
    /// nodes on the grid of their own step size.
    pub fn check_structure(&self, lipschitz: S, bound: S) -> Result<()> {
        let n = self.len();
        let fail = |msg: String| Err(ReachError::Invariant(msg));
        if self.nodes[0] != S::zero() {
            return fail("t_0 != 0".into());
        }
        let mut acc = S::zero();
        let tol = S::of_usize(n.max(1)) * S::epsilon() * self.horizon;
        for j in 1..=n {
            acc = acc + self.steps[j - 1];
            if (acc - self.nodes[j]).abs() > tol {
                return fail(format!("t_{j} = {} differs from cumulative sum {acc}", self.nodes[j]));
            }
        }
        if self.nodes[n] != self.horizon {
            return fail(format!("t_n = {} != T = {}", self.nodes[n], self.horizon));
        }
        let (Some(layout), Some(base)) = (&self.dyadic, self.rho_base) else {
            return Ok(());
        };
        let c = S::of(2.0) * lipschitz * bound;
        if base != c * self.horizon * self.horizon {
            return fail(format!("ρ base {base} != 2LPT²"));
        }
        for j in 1..=n {
            let level = layout.levels[j - 1];
            let width = 1u128 << (TICK_BITS - level);
            if layout.ticks[j] - layout.ticks[j - 1] != width {
                return fail(format!("interval {j} spans the wrong number of ticks"));
            }
            if layout.ticks[j] % width != 0 {
                return fail(format!("t_{j} is not an integer multiple of h_{j}"));
            }
            if layout.quarterings[j] != level {
                return fail(format!(
                    "coupling broken at {j}: q={} level={level}",
                    layout.quarterings[j]
                ));
            }
            let h = self.steps[j - 1];
            if h != self.horizon * S::pow2(-(level as i32)) {
                return fail(format!("h_{j} is not T·2^-{level}"));
            }
            if self.resolutions[j] != c * h * h {
                return fail(format!("ρ_{j} = {} != 2LPh² = {}", self.resolutions[j], c * h * h));
            }
        }
        if layout.ticks[n] != 1u128 << TICK_BITS {
            return fail("last tick is not T".into());
        }
        Ok(())
    }

    /// Plain-text record with one line per array.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, key: &str, vals: &[S]| {
            let _ = write!(out, "{key}");
            for v in vals {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        };
        let _ = writeln!(out, "n {}", self.len());
        line(&mut out, "h", &self.steps);
        line(&mut out, "t", &self.nodes);
        line(&mut out, "rho", &self.resolutions);
        out
    }
}

/// Applies `count` subdivisions at uniformly random indices to the initial
/// discretization; the result satisfies every structural invariant.
pub fn random_conforming<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    horizon: S,
    lipschitz: S,
    bound: S,
    count: usize,
) -> Result<Discretization<S>> {
    let mut disc = Discretization::initial(horizon, lipschitz, bound)?;
    for _ in 0..count {
        let j = rng.gen_range(0..=disc.len());
        disc = disc.subdivide(j)?;
    }
    Ok(disc)
}
