//! The fully discrete Euler recursion
//! `R(0) = π_{ρ_0}(X_0)`, `R(k+1) = ∪_{x ∈ R(k)} π_{ρ_{k+1}}(x + h_{k+1} F(x))`.
//!
//! Besides the sets themselves a run records the exact cost `Ĉ_j` (projected
//! points summed per source, before deduplication) and the surrogate volumes
//! that calibrate the cost estimator.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::discretization::Discretization;
use crate::error::{ReachError, Result};
use crate::lattice::{project_box_ranges, push_range_points, range_count, AxisRange, LatticePoint, LatticeSet};
use crate::refine::error_total;
use crate::scalar::Scalar;
use crate::systems::SystemSpec;

/// Default cap on the lattice points one run may compute.
pub const DEFAULT_CAP: u64 = 50_000_000;

/// Sources handled per parallel task.
const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug)]
pub struct EulerOptions {
    /// Abort once the points computed by a run, `Σ_j Ĉ_j` so far, would exceed this.
    pub cap: u64,
}

impl Default for EulerOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

/// Everything a run produces except the sets.
#[derive(Clone, Debug)]
pub struct RunStats<S> {
    pub disc: Discretization<S>,
    /// `#R(j)`, `j ∈ [0, n]`.
    pub set_sizes: Vec<u64>,
    /// `Ĉ_j`, `j ∈ [0, n-1]`.
    pub cost_exact: Vec<u64>,
    /// `v̂_{R,j} = #R(j)·ρ_j^{d_R}`.
    pub vhat_r: Vec<S>,
    /// `v̂_{F,j} = Ĉ_j/#R(j)·(ρ_{j+1}/h_{j+1})^{d_F}`, last entry repeated.
    pub vhat_f: Vec<S>,
    pub error_bound: S,
    pub wall_time: Duration,
}

impl<S: Scalar> RunStats<S> {
    /// `Ĉ = Σ_j Ĉ_j`.
    pub fn total_cost(&self) -> u64 {
        self.cost_exact.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord<S> {
    pub stats: RunStats<S>,
    /// `R(0), ..., R(n)`.
    pub sets: Vec<LatticeSet<S>>,
}

impl<S: Scalar> RunRecord<S> {
    pub fn total_cost(&self) -> u64 {
        self.stats.total_cost()
    }

    pub fn disc(&self) -> &Discretization<S> {
        &self.stats.disc
    }
}

/// One Euler step from `sources` (on `ρ_k Z^d`) to `ρ_{k+1} Z^d`; returns the new set
/// and `Ĉ_k`. `used` points were computed by earlier steps. The result does not
/// depend on the size of the rayon pool.
#[allow(clippy::too_many_arguments)]
fn step<S: Scalar>(
    system: &SystemSpec<S>,
    sources: &LatticeSet<S>,
    h: S,
    rho_next: S,
    step_index: usize,
    steps: usize,
    used: u64,
    cap: u64,
) -> Result<(LatticeSet<S>, u64)> {
    let dim = system.dim();
    let ranges: Vec<Vec<AxisRange>> = sources
        .points()
        .par_iter()
        .map(|z| {
            let x = sources.state(z);
            let image = system.evaluate_rhs(&x)?.euler_image(&x, h);
            Ok(project_box_ranges(&image, rho_next)?.into_vec())
        })
        .collect::<Result<_>>()?;
    let candidates: u128 = ranges.par_iter().map(|r| range_count(r)).sum();
    if used as u128 + candidates > cap as u128 {
        return Err(ReachError::CapExceeded {
            step: step_index,
            steps,
            points: used as u128 + candidates,
            cap,
        });
    }
    let mut chunks: Vec<LatticePoint> = ranges
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let mut local = Vec::new();
            for r in chunk {
                push_range_points(r, &mut local);
            }
            local.sort_unstable();
            local.dedup();
            local
        })
        .collect();
    chunks.par_sort_unstable();
    chunks.dedup();
    Ok((LatticeSet::from_sorted(rho_next, dim, chunks), candidates as u64))
}

/// Runs the recursion over `disc`, inside the current rayon pool.
pub fn euler_run<S: Scalar>(
    system: &SystemSpec<S>,
    disc: &Discretization<S>,
    options: &EulerOptions,
) -> Result<RunRecord<S>> {
    let started = Instant::now();
    let horizon = system.horizon();
    if (disc.horizon() - horizon).abs() > S::of(1e-12) * horizon {
        return Err(ReachError::InvalidInput(format!(
            "discretization horizon {} does not match system horizon {horizon}",
            disc.horizon()
        )));
    }
    let n = disc.len();
    let rho = disc.resolutions();
    let (dim_r, dim_f) = (system.dim_r(), system.dim_f());

    let initial_ranges = project_box_ranges(system.initial_set(), rho[0])?;
    let initial_count = range_count(&initial_ranges);
    if initial_count > options.cap as u128 {
        return Err(ReachError::CapExceeded {
            step: 0,
            steps: n,
            points: initial_count,
            cap: options.cap,
        });
    }
    let mut points = Vec::with_capacity(initial_count as usize);
    push_range_points(&initial_ranges, &mut points);
    let mut sets = Vec::with_capacity(n + 1);
    sets.push(LatticeSet::from_sorted(rho[0], system.dim(), points));

    let mut cost_exact = Vec::with_capacity(n);
    let mut used = 0u64;
    for k in 0..n {
        let (next, cost) = step(
            system,
            &sets[k],
            disc.step(k + 1),
            rho[k + 1],
            k + 1,
            n,
            used,
            options.cap,
        )?;
        used += cost;
        cost_exact.push(cost);
        sets.push(next);
    }

    let set_sizes: Vec<u64> = sets.iter().map(|s| s.len() as u64).collect();
    let vhat_r: Vec<S> = (0..=n)
        .map(|j| S::of_count(set_sizes[j]) * rho[j].upow(dim_r))
        .collect();
    let mut vhat_f: Vec<S> = (0..n)
        .map(|j| S::of_count(cost_exact[j]) / S::of_count(set_sizes[j]) * (rho[j + 1] / disc.step(j + 1)).upow(dim_f))
        .collect();
    vhat_f.push(vhat_f[n - 1]);

    let error_bound = error_total(disc, system.lipschitz(), system.bound());
    Ok(RunRecord {
        stats: RunStats {
            disc: disc.clone(),
            set_sizes,
            cost_exact,
            vhat_r,
            vhat_f,
            error_bound,
            wall_time: started.elapsed(),
        },
        sets,
    })
}

/// Runs `f` inside a rayon pool with `workers` threads (`0` = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{hausdorff_to_box, project_box};
    use crate::systems::{make_exponential_system, make_michaelis_menten, IntervalBox, Rhs};
    use smallvec::smallvec;
    use std::f64::consts::E;

    #[test]
    fn initial_projection_of_growth_system() {
        // X0 = {1}, ρ0 = 2e: indices z with 2e·z ∈ [1 - e, 1 + e] → z = 0 only
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let disc = Discretization::initial(1.0, 1.0, E).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        assert_eq!(
            run.sets[0].points(),
            &[{
                let p: LatticePoint = smallvec![0];
                p
            }]
        );
        assert_eq!(run.sets.len(), 2);
        assert_eq!(run.stats.cost_exact.len(), 1);
    }

    #[test]
    fn single_step_from_grid_point() {
        // from x = 1 with h = 0.5: box [1.45, 1.5], inflated to [1.2, 1.75] → {1.5}
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let disc = Discretization::from_arrays(1.0, vec![0.5, 0.5], vec![0.0, 0.5, 1.0], vec![1.0, 0.5, 0.5]).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        assert_eq!(
            run.sets[0].points(),
            &[{
                let p: LatticePoint = smallvec![1];
                p
            }]
        );
        assert_eq!(
            run.sets[1].points(),
            &[{
                let p: LatticePoint = smallvec![3];
                p
            }]
        );
        assert_eq!(run.stats.cost_exact[0], 1);
    }

    #[test]
    fn frozen_dynamics_stay_put() {
        let sys = make_exponential_system::<f64>(2, 0.0).unwrap();
        let disc = Discretization::uniform(1.0, 5).unwrap();
        // X0 = (1, 1) is a lattice point of ρ = 1/25
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        for s in &run.sets {
            assert_eq!(s.points(), run.sets[0].points());
        }
        assert_eq!(
            run.sets[0].points(),
            &[{
                let p: LatticePoint = smallvec![25, 25];
                p
            }]
        );
    }

    #[test]
    fn record_invariants() {
        let sys = make_michaelis_menten::<f64>();
        let disc = Discretization::uniform(1.0, 12).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        let rho = disc.resolutions();
        for (cost, size) in run.stats.cost_exact.iter().zip(&run.stats.set_sizes) {
            assert!(cost >= size);
        }
        for (j, r) in rho.iter().enumerate() {
            assert_eq!(run.stats.vhat_r[j], run.stats.set_sizes[j] as f64 * r.powi(2));
            assert!(run.stats.vhat_r[j] > 0.0 && run.stats.vhat_f[j] > 0.0);
        }
        assert_eq!(run.stats.vhat_f[12], run.stats.vhat_f[11]);
        // d_F = 1 for this system
        let j = 3;
        let expected = run.stats.cost_exact[j] as f64 / run.stats.set_sizes[j] as f64 * (rho[j + 1] / disc.step(j + 1));
        assert_eq!(run.stats.vhat_f[j], expected);
    }

    #[test]
    fn deterministic_across_pool_sizes() {
        let sys = make_exponential_system::<f64>(2, 1.0).unwrap();
        let disc = Discretization::uniform(1.0, 10).unwrap();
        let one = with_workers(1, || euler_run(&sys, &disc, &EulerOptions::default()).unwrap());
        let many = with_workers(4, || euler_run(&sys, &disc, &EulerOptions::default()).unwrap());
        assert_eq!(one.sets, many.sets);
        assert_eq!(one.stats.cost_exact, many.stats.cost_exact);
    }

    #[test]
    fn cap_is_enforced() {
        let sys = make_exponential_system::<f64>(2, 1.0).unwrap();
        let disc = Discretization::uniform(1.0, 20).unwrap();
        let err = euler_run(&sys, &disc, &EulerOptions { cap: 10 }).unwrap_err();
        assert!(matches!(err, ReachError::CapExceeded { steps: 20, cap: 10, .. }));
    }

    #[test]
    fn cap_counts_the_whole_run() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let disc = Discretization::uniform(1.0, 23).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions { cap: 5844 }).unwrap();
        assert_eq!(run.total_cost(), 5844);
        let largest = *run.stats.cost_exact.iter().max().unwrap();
        let err = euler_run(&sys, &disc, &EulerOptions { cap: 1000 }).unwrap_err();
        assert!(largest < 1000);
        assert!(matches!(err, ReachError::CapExceeded { points, .. } if points > 1000));
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let disc = Discretization::uniform(2.0, 4).unwrap();
        assert!(euler_run(&sys, &disc, &EulerOptions::default()).is_err());
    }

    #[test]
    fn sets_stay_near_exact_box() {
        let sys = make_exponential_system::<f64>(1, 1.0).unwrap();
        let disc = Discretization::uniform(1.0, 23).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        let last = hausdorff_to_box(&run.sets[23], &sys.exact_reachable_box(1.0).unwrap()).unwrap();
        assert!(last < 0.25);
    }

    #[test]
    fn custom_system_in_f32() {
        let rhs = Rhs::Custom(std::sync::Arc::new(|x: &[f32]| {
            IntervalBox::new(vec![-1.0; x.len()], vec![1.0; x.len()]).unwrap()
        }));
        let sys = SystemSpec::builder("box", IntervalBox::point(&[0.0f32]).unwrap(), rhs)
            .lipschitz(0.0)
            .bound(1.0)
            .build()
            .unwrap();
        let disc = Discretization::<f32>::uniform(1.0, 4).unwrap();
        let run = euler_run(&sys, &disc, &EulerOptions::default()).unwrap();
        // reachable set [-t, t]; the projection of the last step covers it
        let target = project_box(
            &IntervalBox::new(vec![-1.0f32], vec![1.0]).unwrap(),
            disc.resolutions()[4],
        )
        .unwrap();
        assert!(target.points().iter().all(|z| run.sets[4].contains(z)));
    }
}
