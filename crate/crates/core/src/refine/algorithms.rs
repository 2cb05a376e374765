//! The uniform baseline and the adaptive greedy refinement loop.

use std::fmt;
use std::time::{Duration, Instant};

use crate::discretization::Discretization;
use crate::error::{ReachError, Result};
use crate::euler::{euler_run, EulerOptions, RunRecord, RunStats};
use crate::metrics::metric_delta_cost;
use crate::scalar::Scalar;
use crate::systems::SystemSpec;

use super::cost::CostModel;
use super::error_model::error_total;
use super::greedy::greedy_select;

/// Left-hand side of the step-count condition
/// `m²ε - m(e^{LT}-1)(PT + T/(2L)) - T²(e^{LT}-1/2)`; `m` is admissible when it is `≥ 0`.
pub fn uniform_condition<S: Scalar>(m: usize, eps: S, horizon: S, lipschitz: S, bound: S) -> S {
    let (a, b) = uniform_coefficients(horizon, lipschitz, bound);
    let mf = S::of_usize(m);
    mf * mf * eps - mf * a - b
}

fn uniform_coefficients<S: Scalar>(horizon: S, lipschitz: S, bound: S) -> (S, S) {
    let growth = lipschitz * horizon;
    let a = growth.exp_m1() * (bound * horizon + horizon / (S::of(2.0) * lipschitz));
    let b = horizon * horizon * (growth.exp() - S::of(0.5));
    (a, b)
}

/// Smallest `m ≥ 1` satisfying [`uniform_condition`].
pub fn uniform_step_count<S: Scalar>(eps: S, horizon: S, lipschitz: S, bound: S) -> Result<usize> {
    if !(eps > S::zero()) || !eps.is_finite() {
        return Err(ReachError::InvalidInput(format!(
            "tolerance must be positive, got {eps}"
        )));
    }
    let (a, b) = uniform_coefficients(horizon, lipschitz, bound);
    let root = (a + (a * a + S::of(4.0) * eps * b).sqrt()) / (S::of(2.0) * eps);
    let guess = root
        .ceil()
        .to_f64()
        .filter(|r| r.is_finite() && *r < 1e15)
        .ok_or_else(|| ReachError::InvalidInput(format!("tolerance {eps} needs an unrepresentable number of steps")))?;
    let mut m = (guess as usize).max(1);
    let ok = |m: usize| uniform_condition(m, eps, horizon, lipschitz, bound) >= S::zero();
    while !ok(m) {
        m += 1;
    }
    while m > 1 && ok(m - 1) {
        m -= 1;
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct UniformOutcome<S> {
    pub disc: Discretization<S>,
    pub record: RunRecord<S>,
}

/// Uniform discretization with the fewest steps whose bound meets `eps`, then one Euler run.
pub fn algorithm_uniform<S: Scalar>(
    system: &SystemSpec<S>,
    eps: S,
    options: &EulerOptions,
) -> Result<UniformOutcome<S>> {
    let n = uniform_step_count(eps, system.horizon(), system.lipschitz(), system.bound())?;
    let disc = Discretization::uniform(system.horizon(), n)?;
    let record = euler_run(system, &disc, options)?;
    Ok(UniformOutcome { disc, record })
}

/// Powers of two strictly between the target and `initial_error` (largest first), then the target.
pub fn default_ladder<S: Scalar>(initial_error: S, target: S) -> Result<Vec<S>> {
    if !(target > S::zero()) || !target.is_finite() || !initial_error.is_finite() {
        return Err(ReachError::InvalidInput(format!(
            "invalid ladder bounds {initial_error}, {target}"
        )));
    }
    let mut ladder = Vec::new();
    if initial_error > S::zero() {
        let mut eps = S::pow2(initial_error.log2().floor().to_i32().unwrap_or(0));
        while eps >= initial_error {
            eps = eps / S::of(2.0);
        }
        while eps > target * (S::one() + S::of(1e-12)) {
            ladder.push(eps);
            eps = eps / S::of(2.0);
        }
    }
    ladder.push(target);
    Ok(ladder)
}

#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOptions {
    pub euler: EulerOptions,
    /// Subdivisions allowed before the loop is declared non-terminating.
    pub max_iterations: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            euler: EulerOptions::default(),
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<S> {
    pub m: usize,
    pub index: usize,
    pub steps_after: usize,
    pub delta_e: S,
    pub delta_c: S,
    pub ratio: S,
    pub error_after: S,
}

#[derive(Clone, Debug)]
pub struct ThresholdRecord<S> {
    /// 0 for the unconditional first run.
    pub level: usize,
    pub eps: Option<S>,
    pub stats: RunStats<S>,
    /// Relative estimator error against the splines that planned this run.
    pub delta_cost: Option<S>,
    pub cost_final: u64,
    pub cost_cumulative: u64,
    pub reach_time: Duration,
    pub refine_time: Duration,
}

#[derive(Clone, Debug, Default)]
pub struct RefinementTrace<S> {
    pub iterations: Vec<IterationRecord<S>>,
    pub thresholds: Vec<ThresholdRecord<S>>,
}

impl<S: Scalar> RefinementTrace<S> {
    /// Replays the recorded subdivisions from `start`, calling `visit` on every intermediate discretization.
    pub fn replay(
        &self,
        start: Discretization<S>,
        mut visit: impl FnMut(&Discretization<S>) -> Result<()>,
    ) -> Result<Discretization<S>> {
        let mut disc = start;
        visit(&disc)?;
        for it in &self.iterations {
            disc = disc.subdivide(it.index)?;
            visit(&disc)?;
        }
        Ok(disc)
    }

    pub fn cumulative_cost(&self) -> u64 {
        self.thresholds.last().map_or(0, |t| t.cost_cumulative)
    }
}

#[derive(Clone, Debug)]
pub struct AdaptiveOutcome<S> {
    pub disc: Discretization<S>,
    pub record: RunRecord<S>,
    pub trace: RefinementTrace<S>,
}

/// Error together with everything recorded before it happened.
#[derive(Clone, Debug)]
pub struct AdaptiveFailure<S> {
    pub error: ReachError,
    pub trace: RefinementTrace<S>,
}

impl<S: Scalar> fmt::Display for AdaptiveFailure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} subdivisions and {} Euler runs)",
            self.error,
            self.trace.iterations.len(),
            self.trace.thresholds.len()
        )
    }
}

impl<S: Scalar> std::error::Error for AdaptiveFailure<S> {}

fn check_ladder<S: Scalar>(ladder: &[S]) -> Result<()> {
    if ladder.is_empty() {
        return Err(ReachError::InvalidInput("tolerance ladder is empty".into()));
    }
    if ladder.iter().any(|e| !(*e > S::zero()) || !e.is_finite()) {
        return Err(ReachError::InvalidInput("tolerances must be positive".into()));
    }
    if ladder.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(ReachError::InvalidInput(
            "tolerance ladder must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Greedy refinement over a decreasing tolerance ladder. An Euler run happens first
/// unconditionally and then whenever the bound drops below the current rung; each
/// run recalibrates the cost model used by the following subdivisions.
pub fn algorithm_adaptive<S: Scalar>(
    system: &SystemSpec<S>,
    ladder: &[S],
    options: &AdaptiveOptions,
) -> std::result::Result<AdaptiveOutcome<S>, AdaptiveFailure<S>> {
    let mut trace = RefinementTrace {
        iterations: Vec::new(),
        thresholds: Vec::new(),
    };
    macro_rules! tri {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(error) => return Err(AdaptiveFailure { error, trace }),
            }
        };
    }
    tri!(check_ladder(ladder));
    let (lipschitz, bound) = (system.lipschitz(), system.bound());
    let mut disc = tri!(Discretization::initial(system.horizon(), lipschitz, bound));
    let mut error = error_total(&disc, lipschitz, bound);
    let mut model: Option<CostModel<S>> = None;
    let mut level = 0usize;
    let mut cumulative = 0u64;
    let mut refine_clock = Instant::now();

    loop {
        let threshold = level.checked_sub(1).map(|l| ladder[l]);
        if threshold.is_none_or(|eps| error <= eps) {
            let refine_time = refine_clock.elapsed();
            let started = Instant::now();
            let record = tri!(euler_run(system, &disc, &options.euler));
            let reach_time = started.elapsed();
            let delta_cost = match &model {
                Some(m) => Some(tri!(metric_delta_cost(&record.stats, m))),
                None => None,
            };
            let cost_final = record.total_cost();
            cumulative += cost_final;
            model = Some(tri!(CostModel::from_stats(
                &record.stats,
                system.dim_r(),
                system.dim_f()
            )));
            trace.thresholds.push(ThresholdRecord {
                level,
                eps: threshold,
                stats: record.stats.clone(),
                delta_cost,
                cost_final,
                cost_cumulative: cumulative,
                reach_time,
                refine_time,
            });
            level += 1;
            if level > ladder.len() {
                return Ok(AdaptiveOutcome { disc, record, trace });
            }
            refine_clock = Instant::now();
            continue;
        }
        let m = trace.iterations.len();
        if m >= options.max_iterations {
            tri!(Err(ReachError::Invariant(format!(
                "refinement did not reach tolerance {} within {m} subdivisions (E = {error})",
                threshold.unwrap_or_else(S::zero)
            ))));
        }
        let current = model.as_ref().expect("a run precedes every subdivision");
        let choice = tri!(greedy_select(&disc, lipschitz, bound, current));
        disc = tri!(disc.subdivide(choice.index));
        let next = error_total(&disc, lipschitz, bound);
        if !(next < error) {
            tri!(Err(ReachError::Invariant(format!(
                "E did not decrease at iteration {m}: {error} -> {next}"
            ))));
        }
        error = next;
        trace.iterations.push(IterationRecord {
            m,
            index: choice.index,
            steps_after: disc.len(),
            delta_e: choice.delta_e,
            delta_c: choice.delta_c,
            ratio: choice.ratio,
            error_after: error,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::error_model::error_total;
    use crate::systems::make_exponential_system;
    use std::f64::consts::E;

    #[test]
    fn step_count_of_growth_system() {
        assert_eq!(uniform_step_count(0.25, 1.0, 1.0, E).unwrap(), 23);
        // independent linear scan
        let scan = (1..).find(|&m| uniform_condition(m, 0.25, 1.0, 1.0, E) >= 0.0).unwrap();
        assert_eq!(scan, 23);
        assert!(uniform_condition(22, 0.25, 1.0, 1.0, E) < 0.0);
    }

    #[test]
    fn step_count_is_minimal_and_meets_tolerance() {
        for &(eps, l) in &[(0.25, 1.0), (0.125, 1.0), (2.0, 2.0), (4.0, 4.0), (0.01, 0.5)] {
            let p = l * f64::exp(l);
            let n = uniform_step_count(eps, 1.0, l, p).unwrap();
            assert!(uniform_condition(n, eps, 1.0, l, p) >= 0.0);
            if n > 1 {
                assert!(uniform_condition(n - 1, eps, 1.0, l, p) < 0.0);
            }
            let disc = Discretization::uniform(1.0, n).unwrap();
            assert!(error_total(&disc, l, p) <= eps, "eps {eps} L {l}");
        }
        let huge = uniform_condition(1, 1.0, 1.0, 1.0, E);
        assert_eq!(uniform_step_count(1e6 + huge.abs(), 1.0, 1.0, E).unwrap(), 1);
        assert!(uniform_step_count(0.0, 1.0, 1.0, E).is_err());
    }

    #[test]
    fn ladder_defaults() {
        assert_eq!(
            default_ladder(21.4, 0.25).unwrap(),
            vec![16.0, 8.0, 4.0, 2.0, 1.0, 0.5, 0.25]
        );
        assert_eq!(default_ladder(16.0, 3.0).unwrap(), vec![8.0, 4.0, 3.0]);
        assert_eq!(default_ladder(1.0, 5.0).unwrap(), vec![5.0]);
        assert!(default_ladder(1.0, -1.0).is_err());
    }

    #[test]
    fn trivially_satisfied_ladder_runs_twice() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let out = algorithm_adaptive(&sys, &[100.0], &AdaptiveOptions::default()).unwrap();
        assert_eq!(out.trace.thresholds.len(), 2);
        assert!(out.trace.iterations.is_empty());
        assert_eq!(out.trace.thresholds[0].delta_cost, None);
        assert_eq!(out.trace.thresholds[1].delta_cost, Some(0.0));
        assert_eq!(out.disc.len(), 1);
    }

    #[test]
    fn adaptive_meets_each_rung() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let ladder = default_ladder(error_total(&Discretization::initial(1.0, 1.0, E).unwrap(), 1.0, E), 1.0).unwrap();
        let out = algorithm_adaptive(&sys, &ladder, &AdaptiveOptions::default()).unwrap();
        assert_eq!(out.trace.thresholds.len(), ladder.len() + 1);
        for t in &out.trace.thresholds[1..] {
            assert!(t.stats.error_bound <= t.eps.unwrap());
        }
        assert!(out
            .trace
            .iterations
            .windows(2)
            .all(|w| w[1].error_after < w[0].error_after));
        let replayed = out
            .trace
            .replay(Discretization::initial(1.0, 1.0, E).unwrap(), |d| {
                d.check_structure(1.0, E)
            })
            .unwrap();
        assert_eq!(replayed, out.disc);
    }

    #[test]
    fn bad_ladders_fail() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        for ladder in [vec![], vec![1.0, 2.0], vec![1.0, 1.0], vec![0.0]] {
            let err = algorithm_adaptive(&sys, &ladder, &AdaptiveOptions::default()).unwrap_err();
            assert!(matches!(err.error, ReachError::InvalidInput(_)));
        }
    }

    #[test]
    fn iteration_limit_reports_partial_trace() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let opts = AdaptiveOptions {
            max_iterations: 3,
            ..Default::default()
        };
        let err = algorithm_adaptive(&sys, &[0.25], &opts).unwrap_err();
        assert!(matches!(err.error, ReachError::Invariant(_)));
        assert_eq!(err.trace.iterations.len(), 3);
        assert_eq!(err.trace.thresholds.len(), 1);
    }
}
