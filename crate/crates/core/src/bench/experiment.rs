//! One experiment per call: build the system, run an algorithm, collect metrics.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::discretization::Discretization;
use crate::error::ReachError;
use crate::euler::{with_workers, EulerOptions, RunRecord};
use crate::lattice::hausdorff_to_box;
use crate::metrics::{metric_sigma, Sigma};
use crate::refine::{
    algorithm_adaptive, algorithm_uniform, default_ladder, error_partial_sums, error_total, AdaptiveOptions,
    AdaptiveOutcome, UniformOutcome,
};
use crate::systems::SystemSpec;

use super::config::{ExperimentConfig, SystemKind};
use super::output;
use super::BenchError;

#[derive(Clone, Debug)]
pub struct UniformReport {
    pub hash: String,
    pub eps: f64,
    pub outcome: UniformOutcome<f64>,
    pub sigma: Sigma<f64>,
    pub partial_bounds: Vec<f64>,
    /// Distance of each set to the exact reachable box, where that box is known.
    pub hausdorff: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct AdaptiveReport {
    pub hash: String,
    pub ladder: Vec<f64>,
    pub outcome: AdaptiveOutcome<f64>,
    pub sigma: Sigma<f64>,
    pub partial_bounds: Vec<f64>,
    pub hausdorff: Option<Vec<f64>>,
}

fn prepare(cfg: &ExperimentConfig) -> Result<(SystemSpec<f64>, f64), BenchError> {
    cfg.validate()?;
    Ok((cfg.build_system()?, cfg.target()?))
}

fn exact_distances(system: &SystemSpec<f64>, record: &RunRecord<f64>) -> Result<Option<Vec<f64>>, BenchError> {
    if system.exact_reachable_box(0.0).is_err() {
        return Ok(None);
    }
    let nodes = record.disc().nodes();
    let distances = record
        .sets
        .par_iter()
        .zip(nodes.par_iter())
        .map(|(set, &t)| hausdorff_to_box(set, &system.exact_reachable_box(t)?))
        .collect::<Result<Vec<_>, ReachError>>()?;
    Ok(Some(distances))
}

pub fn run_uniform(cfg: &ExperimentConfig) -> Result<UniformReport, BenchError> {
    let (system, eps) = prepare(cfg)?;
    with_workers(cfg.workers, || {
        let outcome = algorithm_uniform(&system, eps, &EulerOptions { cap: cfg.cap })?;
        let (l, p) = (system.lipschitz(), system.bound());
        let stats = &outcome.record.stats;
        Ok(UniformReport {
            hash: cfg.hash(),
            eps,
            sigma: metric_sigma(stats, l, p),
            partial_bounds: error_partial_sums(&stats.disc, l, p),
            hausdorff: exact_distances(&system, &outcome.record)?,
            outcome,
        })
    })
}

/// The configured ladder, or the default halving ladder down to the target.
pub fn resolve_ladder(cfg: &ExperimentConfig, system: &SystemSpec<f64>, target: f64) -> Result<Vec<f64>, BenchError> {
    if let Some(ladder) = &cfg.ladder {
        return Ok(ladder.clone());
    }
    let (l, p) = (system.lipschitz(), system.bound());
    let initial = Discretization::initial(system.horizon(), l, p)?;
    Ok(default_ladder(error_total(&initial, l, p), target)?)
}

pub fn run_adaptive(cfg: &ExperimentConfig) -> Result<AdaptiveReport, BenchError> {
    let (system, target) = prepare(cfg)?;
    let ladder = resolve_ladder(cfg, &system, target)?;
    with_workers(cfg.workers, || {
        let options = AdaptiveOptions {
            euler: EulerOptions { cap: cfg.cap },
            ..Default::default()
        };
        let outcome = algorithm_adaptive(&system, &ladder, &options).map_err(|f| BenchError::Adaptive(Box::new(f)))?;
        let (l, p) = (system.lipschitz(), system.bound());
        let stats = &outcome.record.stats;
        Ok(AdaptiveReport {
            hash: cfg.hash(),
            sigma: metric_sigma(stats, l, p),
            partial_bounds: error_partial_sums(&stats.disc, l, p),
            hausdorff: exact_distances(&system, &outcome.record)?,
            ladder: ladder.clone(),
            outcome,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// The cardinality cap stopped the run.
    Cap,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Cap => "cap",
        })
    }
}

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub hash: String,
    pub system: SystemKind,
    pub d: usize,
    pub rate: Option<f64>,
    pub eps: f64,
    pub uniform_status: CellStatus,
    pub uniform_steps: Option<usize>,
    pub uniform_cost: Option<u64>,
    pub adaptive_status: CellStatus,
    pub adaptive_steps: Option<usize>,
    pub adaptive_cost_final: Option<u64>,
    pub adaptive_cost_cumulative: Option<u64>,
}

impl ComparisonRow {
    /// Adaptive final-run cost over uniform cost, when both finished.
    pub fn cost_ratio(&self) -> Option<f64> {
        Some(self.adaptive_cost_final? as f64 / self.uniform_cost? as f64)
    }
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub row: ComparisonRow,
    pub uniform: Option<UniformReport>,
    pub adaptive: Option<AdaptiveReport>,
}

fn is_cap(err: &BenchError) -> bool {
    match err {
        BenchError::Reach(ReachError::CapExceeded { .. }) => true,
        BenchError::Adaptive(f) => matches!(f.error, ReachError::CapExceeded { .. }),
        _ => false,
    }
}

/// Runs both algorithms; hitting the cap marks the cell instead of failing it.
pub fn compare(cfg: &ExperimentConfig) -> Result<Comparison, BenchError> {
    let (system, eps) = prepare(cfg)?;
    let uniform = match run_uniform(cfg) {
        Ok(r) => Some(r),
        Err(e) if is_cap(&e) => None,
        Err(e) => return Err(e),
    };
    let adaptive = match run_adaptive(cfg) {
        Ok(r) => Some(r),
        Err(e) if is_cap(&e) => None,
        Err(e) => return Err(e),
    };
    let status = |ok: bool| if ok { CellStatus::Ok } else { CellStatus::Cap };
    let row = ComparisonRow {
        hash: cfg.hash(),
        system: cfg.system,
        d: system.dim(),
        rate: (cfg.system == SystemKind::Exponential).then_some(cfg.rate),
        eps,
        uniform_status: status(uniform.is_some()),
        uniform_steps: uniform.as_ref().map(|r| r.outcome.disc.len()),
        uniform_cost: uniform.as_ref().map(|r| r.outcome.record.total_cost()),
        adaptive_status: status(adaptive.is_some()),
        adaptive_steps: adaptive.as_ref().map(|r| r.outcome.disc.len()),
        adaptive_cost_final: adaptive.as_ref().map(|r| r.outcome.record.total_cost()),
        adaptive_cost_cumulative: adaptive.as_ref().map(|r| r.outcome.trace.cumulative_cost()),
    };
    Ok(Comparison { row, uniform, adaptive })
}

/// Compares every `(d, L, ε)` cell of the exponential system in turn.
pub fn sweep(
    base: &ExperimentConfig,
    dims: &[usize],
    rates: &[f64],
    tolerances: &[f64],
) -> Result<Vec<ComparisonRow>, BenchError> {
    if base.system != SystemKind::Exponential {
        return Err(BenchError::Config("sweep is defined for the exponential system".into()));
    }
    let mut rows = Vec::new();
    for &d in dims {
        for &rate in rates {
            for &eps in tolerances {
                let cell = ExperimentConfig {
                    d,
                    rate,
                    eps: Some(eps),
                    ladder: None,
                    ..base.clone()
                };
                rows.push(compare(&cell)?.row);
            }
        }
    }
    Ok(rows)
}

/// Writes the CSV series behind the profile, estimator and step-size plots into `dir`.
pub fn emit_figure_data(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let comparison = compare(cfg)?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> std::io::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    if let Some(u) = &comparison.uniform {
        put(
            "sigma_uniform.csv",
            output::sigma_csv(&u.outcome.record.stats, &u.sigma),
        )?;
    }
    if let Some(a) = &comparison.adaptive {
        put(
            "sigma_adaptive.csv",
            output::sigma_csv(&a.outcome.record.stats, &a.sigma),
        )?;
        put("delta_cost.csv", output::thresholds_csv(&a.outcome.trace))?;
        put("steps_adaptive.csv", output::grid_csv(&a.outcome.disc))?;
        put("trace.csv", output::trace_csv(&a.outcome.trace))?;
    }
    put(
        "comparison.csv",
        output::comparison_csv(std::slice::from_ref(&comparison.row)),
    )?;
    if let Some(a) = &comparison.adaptive {
        let snap_dir = dir.join("snapshots");
        std::fs::create_dir_all(&snap_dir)?;
        written.extend(output::write_snapshots(
            &snap_dir,
            &a.outcome.record,
            cfg.snapshot_stride.unwrap_or(1),
            true,
        )?);
    }
    Ok(written)
}
