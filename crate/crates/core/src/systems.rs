//! Differential inclusions `x' ∈ F(x)` with box-valued right-hand sides.
//!
//! A [`SystemSpec`] bundles the set-valued map `F` together with the constants the
//! error analysis needs: the Lipschitz constant `L` (Hausdorff distance of images,
//! max-norm), the uniform bound `P` on `‖f‖∞` for `f ∈ F(x)`, the horizon `T`, the
//! initial set and the effective dimensions `d_R`/`d_F` used by the cost model.
//!
//! Two benchmark systems are built in: the scalar-growth inclusion
//! `x_i' ∈ [0.9, 1.0]·L·x_i` with known reachable sets, and a reduced
//! Michaelis–Menten model with an uncertain rate constant.

use std::fmt;
use std::sync::Arc;

use crate::error::{ReachError, Result};
use crate::scalar::Scalar;

/// Default floor applied to `L` and `P`; both appear in denominators.
pub const DEFAULT_CONSTANT_FLOOR: f64 = 1e-12;

/// Axis-aligned box `[lower, upper] ⊂ R^d`. Degenerate (point) boxes are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalBox<S> {
    lower: Vec<S>,
    upper: Vec<S>,
}

impl<S: Scalar> IntervalBox<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.is_empty() {
            return Err(ReachError::InvalidInput("box must have dimension >= 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(ReachError::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            // NaN fails the `<=` as well.
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ReachError::InvalidInput(format!(
                    "empty or non-finite box on axis {i}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn point(x: &[S]) -> Result<Self> {
        Self::new(x.to_vec(), x.to_vec())
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: S, hi: S) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[S] {
        &self.lower
    }

    pub fn upper(&self) -> &[S] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> S {
        self.upper[axis] - self.lower[axis]
    }

    pub fn contains(&self, x: &[S]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    /// Max-norm distance from `x` to the closest point of the box.
    pub fn distance_to_point(&self, x: &[S]) -> S {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| {
                if v < lo {
                    lo - v
                } else if v > hi {
                    v - hi
                } else {
                    S::zero()
                }
            })
            .fold(S::zero(), S::max)
    }

    /// Hausdorff distance in the max norm; for products of intervals it is the
    /// largest per-axis endpoint displacement.
    pub fn hausdorff(&self, other: &Self) -> Result<S> {
        if self.dim() != other.dim() {
            return Err(ReachError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok((0..self.dim())
            .map(|i| {
                (self.lower[i] - other.lower[i])
                    .abs()
                    .max((self.upper[i] - other.upper[i]).abs())
            })
            .fold(S::zero(), S::max))
    }

    /// Largest max-norm over the corners, i.e. `sup_{f ∈ box} ‖f‖∞`.
    pub fn max_abs(&self) -> S {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .fold(S::zero(), S::max)
    }

    /// `x + h·self`, rounded outward by one relative machine epsilon per bound.
    pub fn euler_image(&self, x: &[S], h: S) -> Self {
        let eps = S::epsilon();
        let mut lower = Vec::with_capacity(x.len());
        let mut upper = Vec::with_capacity(x.len());
        for (i, &xi) in x.iter().enumerate() {
            let lo = xi + h * self.lower[i];
            let hi = xi + h * self.upper[i];
            lower.push(lo - lo.abs() * eps);
            upper.push(hi + hi.abs() * eps);
        }
        Self { lower, upper }
    }
}

/// `[a, b]·x` for an interval `[a, b]` and a real `x`, with the sign of `x` respected.
fn scale_interval<S: Scalar>(a: S, b: S, x: S) -> (S, S) {
    let (p, q) = (a * x, b * x);
    (p.min(q), p.max(q))
}

/// Parameters of the reduced Michaelis–Menten system
/// `x1' = -k1 e0 x1 + (k1 x1 + k_-1) x2`,
/// `x2' ∈ k1 e0 x1 - (k1 x1 + k_-1 + [k2-, k2+]) x2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MichaelisMentenParams<S> {
    pub e0: S,
    pub k_minus1: S,
    pub k1: S,
    pub k2_lower: S,
    pub k2_upper: S,
}

impl<S: Scalar> Default for MichaelisMentenParams<S> {
    fn default() -> Self {
        Self {
            e0: S::of(0.6),
            k_minus1: S::of(0.05),
            k1: S::of(0.5),
            k2_lower: S::of(1.8),
            k2_upper: S::of(2.0),
        }
    }
}

impl<S: Scalar> MichaelisMentenParams<S> {
    fn eval(&self, x: &[S]) -> IntervalBox<S> {
        let (x1, x2) = (x[0], x[1]);
        let binding = self.k1 * x1 + self.k_minus1;
        let f1 = -self.k1 * self.e0 * x1 + binding * x2;
        let base = self.k1 * self.e0 * x1 - binding * x2;
        let (lo, hi) = scale_interval(self.k2_lower, self.k2_upper, x2);
        IntervalBox {
            lower: vec![f1, base - hi],
            upper: vec![f1, base - lo],
        }
    }
}

pub type RhsFn<S> = Arc<dyn Fn(&[S]) -> IntervalBox<S> + Send + Sync>;

/// The set-valued right-hand side.
#[derive(Clone)]
pub enum Rhs<S> {
    /// `F(x)_i = [0.9·L·x_i, L·x_i]` (endpoints ordered).
    Exponential {
        rate: S,
    },
    MichaelisMenten(MichaelisMentenParams<S>),
    /// Any user-supplied box-valued map.
    Custom(RhsFn<S>),
}

impl<S: Scalar> fmt::Debug for Rhs<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rhs::Exponential { rate } => f.debug_struct("Exponential").field("rate", rate).finish(),
            Rhs::MichaelisMenten(p) => f.debug_tuple("MichaelisMenten").field(p).finish(),
            Rhs::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<S: Scalar> Rhs<S> {
    fn eval(&self, x: &[S]) -> IntervalBox<S> {
        match self {
            Rhs::Exponential { rate } => {
                let lo_factor = S::of(0.9) * *rate;
                let mut lower = Vec::with_capacity(x.len());
                let mut upper = Vec::with_capacity(x.len());
                for &xi in x {
                    let (lo, hi) = scale_interval(lo_factor, *rate, xi);
                    lower.push(lo);
                    upper.push(hi);
                }
                IntervalBox { lower, upper }
            }
            Rhs::MichaelisMenten(p) => p.eval(x),
            Rhs::Custom(f) => f(x),
        }
    }
}

/// A differential-inclusion instance. Immutable once built; `evaluate_rhs` may be
/// called concurrently.
#[derive(Clone, Debug)]
pub struct SystemSpec<S: Scalar> {
    name: String,
    dim: usize,
    horizon: S,
    lipschitz: S,
    bound: S,
    initial: IntervalBox<S>,
    rhs: Rhs<S>,
    dim_r: u32,
    dim_f: u32,
    domain: IntervalBox<S>,
}

impl<S: Scalar> SystemSpec<S> {
    pub fn builder(name: impl Into<String>, initial: IntervalBox<S>, rhs: Rhs<S>) -> SystemBuilder<S> {
        let dim = initial.dim();
        SystemBuilder {
            name: name.into(),
            initial,
            rhs,
            horizon: S::one(),
            lipschitz: S::one(),
            bound: S::one(),
            dim_r: dim as u32,
            dim_f: dim as u32,
            domain: None,
            floor: S::of(DEFAULT_CONSTANT_FLOOR),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    /// Lipschitz constant after flooring.
    pub fn lipschitz(&self) -> S {
        self.lipschitz
    }

    /// Velocity bound after flooring.
    pub fn bound(&self) -> S {
        self.bound
    }

    pub fn initial_set(&self) -> &IntervalBox<S> {
        &self.initial
    }

    pub fn rhs(&self) -> &Rhs<S> {
        &self.rhs
    }

    pub fn dim_r(&self) -> u32 {
        self.dim_r
    }

    pub fn dim_f(&self) -> u32 {
        self.dim_f
    }

    /// Region over which `L` and `P` are claimed; used by the sampling checks.
    pub fn domain(&self) -> &IntervalBox<S> {
        &self.domain
    }

    /// Returns a copy with different effective dimensions.
    pub fn with_effective_dims(mut self, dim_r: u32, dim_f: u32) -> Result<Self> {
        check_effective_dims(self.dim, dim_r, dim_f)?;
        self.dim_r = dim_r;
        self.dim_f = dim_f;
        Ok(self)
    }

    /// Interval hull of `F(x)`.
    pub fn evaluate_rhs(&self, x: &[S]) -> Result<IntervalBox<S>> {
        if x.len() != self.dim {
            return Err(ReachError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let image = self.rhs.eval(x);
        if image.dim() != self.dim {
            return Err(ReachError::DimensionMismatch {
                expected: self.dim,
                found: image.dim(),
            });
        }
        Ok(image)
    }

    /// Closed-form reachable box `[e^{0.9Lt}, e^{Lt}]^d`, only for the growth system.
    pub fn exact_reachable_box(&self, t: S) -> Result<IntervalBox<S>> {
        let Rhs::Exponential { rate } = &self.rhs else {
            return Err(ReachError::Unsupported(format!(
                "no closed-form reachable set for system '{}'",
                self.name
            )));
        };
        if !(t >= S::zero() && t <= self.horizon) {
            return Err(ReachError::InvalidInput(format!(
                "time {t} outside [0, {}]",
                self.horizon
            )));
        }
        let lo = (S::of(0.9) * *rate * t).exp();
        let hi = (*rate * t).exp();
        IntervalBox::cube(self.dim, lo, hi)
    }
}

fn check_effective_dims(dim: usize, dim_r: u32, dim_f: u32) -> Result<()> {
    if dim_r < 1 || dim_r as usize > dim || dim_f as usize > dim {
        return Err(ReachError::InvalidInput(format!(
            "effective dimensions must satisfy 1 <= d_R <= {dim} and 0 <= d_F <= {dim}, got d_R={dim_r}, d_F={dim_f}"
        )));
    }
    Ok(())
}

pub struct SystemBuilder<S> {
    name: String,
    initial: IntervalBox<S>,
    rhs: Rhs<S>,
    horizon: S,
    lipschitz: S,
    bound: S,
    dim_r: u32,
    dim_f: u32,
    domain: Option<IntervalBox<S>>,
    floor: S,
}

impl<S: Scalar> SystemBuilder<S> {
    pub fn horizon(mut self, horizon: S) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn lipschitz(mut self, lipschitz: S) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn bound(mut self, bound: S) -> Self {
        self.bound = bound;
        self
    }

    pub fn effective_dims(mut self, dim_r: u32, dim_f: u32) -> Self {
        self.dim_r = dim_r;
        self.dim_f = dim_f;
        self
    }

    pub fn domain(mut self, domain: IntervalBox<S>) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Floor applied to `L` and `P` (default `1e-12`).
    pub fn constant_floor(mut self, floor: S) -> Self {
        self.floor = floor;
        self
    }

    pub fn build(self) -> Result<SystemSpec<S>> {
        let dim = self.initial.dim();
        if !(self.horizon > S::zero()) || !self.horizon.is_finite() {
            return Err(ReachError::InvalidInput(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if !(self.lipschitz >= S::zero()) || !(self.bound >= S::zero()) {
            return Err(ReachError::InvalidInput("L and P must be nonnegative".into()));
        }
        if !(self.floor > S::zero()) {
            return Err(ReachError::InvalidInput("constant floor must be > 0".into()));
        }
        check_effective_dims(dim, self.dim_r, self.dim_f)?;
        let domain = self.domain.unwrap_or_else(|| self.initial.clone());
        if domain.dim() != dim {
            return Err(ReachError::DimensionMismatch {
                expected: dim,
                found: domain.dim(),
            });
        }
        Ok(SystemSpec {
            name: self.name,
            dim,
            horizon: self.horizon,
            lipschitz: self.lipschitz.max(self.floor),
            bound: self.bound.max(self.floor),
            initial: self.initial,
            rhs: self.rhs,
            dim_r: self.dim_r,
            dim_f: self.dim_f,
            domain,
        })
    }
}

/// `x_i' ∈ [0.9, 1.0]·L·x_i` on `[0, 1]` from `x(0) = 𝟙`, with `P = L e^L` and `d_R = d_F = d`.
pub fn make_exponential_system<S: Scalar>(dim: usize, rate: S) -> Result<SystemSpec<S>> {
    if dim == 0 {
        return Err(ReachError::InvalidInput("dimension must be >= 1".into()));
    }
    if !(rate >= S::zero()) || !rate.is_finite() {
        return Err(ReachError::InvalidInput(format!(
            "L must be finite and >= 0, got {rate}"
        )));
    }
    let reach = rate.exp();
    SystemSpec::builder(
        "exponential",
        IntervalBox::cube(dim, S::one(), S::one())?,
        Rhs::Exponential { rate },
    )
    .horizon(S::one())
    .lipschitz(rate)
    .bound(rate * reach)
    .effective_dims(dim as u32, dim as u32)
    .domain(IntervalBox::cube(dim, -reach, reach)?)
    .build()
}

/// Reduced Michaelis–Menten system from `(0.75, 0.25)` on `[0, 1]` with
/// `L = 3.0`, `P = 0.61`, `d_R = 2`, `d_F = 1`.
pub fn make_michaelis_menten<S: Scalar>() -> SystemSpec<S> {
    SystemSpec::builder(
        "michaelis-menten",
        IntervalBox::point(&[S::of(0.75), S::of(0.25)]).expect("finite point"),
        Rhs::MichaelisMenten(MichaelisMentenParams::default()),
    )
    .horizon(S::one())
    .lipschitz(S::of(3.0))
    .bound(S::of(0.61))
    .effective_dims(2, 1)
    .domain(IntervalBox::new(vec![S::of(0.5), S::zero()], vec![S::of(0.8), S::of(0.3)]).expect("valid box"))
    .build()
    .expect("built-in system is valid")
}
