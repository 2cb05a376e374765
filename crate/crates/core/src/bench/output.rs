//! Text and CSV writers. Everything except `timing.csv` depends only on the
//! configuration, so repeated runs produce identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::discretization::Discretization;
use crate::euler::{RunRecord, RunStats};
use crate::metrics::Sigma;
use crate::refine::RefinementTrace;

use super::config::ExperimentConfig;
use super::experiment::{AdaptiveReport, ComparisonRow, UniformReport};

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-node table of a run.
pub fn steps_csv(stats: &RunStats<f64>, sigma: &Sigma<f64>, partial: &[f64], hausdorff: Option<&[f64]>) -> String {
    let disc = &stats.disc;
    let mut out = String::from("j,t,h,rho,set_size,cost,vhat_r,vhat_f,error_partial,sigma_e,sigma_c,hausdorff\n");
    for j in 0..=disc.len() {
        let h = if j == 0 {
            String::new()
        } else {
            disc.step(j).to_string()
        };
        let _ = writeln!(
            out,
            "{j},{},{h},{},{},{},{},{},{},{},{},{}",
            disc.nodes()[j],
            disc.resolutions()[j],
            stats.set_sizes[j],
            opt(stats.cost_exact.get(j)),
            stats.vhat_r[j],
            stats.vhat_f[j],
            partial[j],
            sigma.error[j],
            sigma.cost[j],
            opt(hausdorff.map(|h| h[j])),
        );
    }
    out
}

pub fn sigma_csv(stats: &RunStats<f64>, sigma: &Sigma<f64>) -> String {
    let mut out = String::from("j,t,sigma_e,sigma_c\n");
    for (j, t) in stats.disc.nodes().iter().enumerate() {
        let _ = writeln!(out, "{j},{t},{},{}", sigma.error[j], sigma.cost[j]);
    }
    out
}

pub fn grid_csv(disc: &Discretization<f64>) -> String {
    let mut out = String::from("j,t,h,rho\n");
    for j in 0..=disc.len() {
        let h = if j == 0 {
            String::new()
        } else {
            disc.step(j).to_string()
        };
        let _ = writeln!(out, "{j},{},{h},{}", disc.nodes()[j], disc.resolutions()[j]);
    }
    out
}

pub fn trace_csv(trace: &RefinementTrace<f64>) -> String {
    let mut out = String::from("m,k,n,delta_e,delta_c,ratio,error\n");
    for it in &trace.iterations {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            it.m, it.index, it.steps_after, it.delta_e, it.delta_c, it.ratio, it.error_after
        );
    }
    out
}

pub fn thresholds_csv(trace: &RefinementTrace<f64>) -> String {
    let mut out = String::from("level,eps,n,error,cost_final,cost_cumulative,delta_c\n");
    for t in &trace.thresholds {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            t.level,
            opt(t.eps),
            t.stats.disc.len(),
            t.stats.error_bound,
            t.cost_final,
            t.cost_cumulative,
            opt(t.delta_cost)
        );
    }
    out
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "config_hash,system,d,L,eps,uniform_status,uniform_n,uniform_cost,adaptive_status,adaptive_n,adaptive_cost_final,adaptive_cost_cumulative,cost_ratio\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.hash,
            r.system,
            r.d,
            opt(r.rate),
            r.eps,
            r.uniform_status,
            opt(r.uniform_steps),
            opt(r.uniform_cost),
            r.adaptive_status,
            opt(r.adaptive_steps),
            opt(r.adaptive_cost_final),
            opt(r.adaptive_cost_cumulative),
            opt(r.cost_ratio()),
        );
    }
    out
}

fn summary_header(cfg: &ExperimentConfig, hash: &str, algorithm: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "config_hash {hash}");
    let _ = writeln!(out, "algorithm {algorithm}");
    let _ = writeln!(out, "system {}", cfg.system);
    out
}

pub fn uniform_summary(cfg: &ExperimentConfig, r: &UniformReport) -> String {
    let stats = &r.outcome.record.stats;
    let mut out = summary_header(cfg, &r.hash, "uniform");
    let _ = writeln!(out, "dim {}", r.outcome.record.sets[0].dim());
    let _ = writeln!(out, "eps {}", r.eps);
    let _ = writeln!(out, "steps {}", r.outcome.disc.len());
    let _ = writeln!(out, "error_bound {}", stats.error_bound);
    let _ = writeln!(out, "cost {}", stats.total_cost());
    let _ = writeln!(out, "final_set_size {}", stats.set_sizes.last().copied().unwrap_or(0));
    if let Some(h) = &r.hausdorff {
        let _ = writeln!(out, "max_hausdorff {}", h.iter().copied().fold(0.0, f64::max));
    }
    out
}

pub fn adaptive_summary(cfg: &ExperimentConfig, r: &AdaptiveReport) -> String {
    let stats = &r.outcome.record.stats;
    let mut out = summary_header(cfg, &r.hash, "adaptive");
    let _ = writeln!(out, "dim {}", r.outcome.record.sets[0].dim());
    let ladder: Vec<String> = r.ladder.iter().map(f64::to_string).collect();
    let _ = writeln!(out, "ladder {}", ladder.join(" "));
    let _ = writeln!(out, "steps {}", r.outcome.disc.len());
    let _ = writeln!(out, "subdivisions {}", r.outcome.trace.iterations.len());
    let _ = writeln!(out, "euler_runs {}", r.outcome.trace.thresholds.len());
    let _ = writeln!(out, "error_bound {}", stats.error_bound);
    let _ = writeln!(out, "cost_final {}", stats.total_cost());
    let _ = writeln!(out, "cost_cumulative {}", r.outcome.trace.cumulative_cost());
    let _ = writeln!(out, "final_set_size {}", stats.set_sizes.last().copied().unwrap_or(0));
    if let Some(h) = &r.hausdorff {
        let _ = writeln!(out, "max_hausdorff {}", h.iter().copied().fold(0.0, f64::max));
    }
    out
}

/// Snapshot files `set_NNNNN.txt`; all nodes when `all`, else only the last.
pub fn write_snapshots(dir: &Path, record: &RunRecord<f64>, stride: i64, all: bool) -> std::io::Result<Vec<PathBuf>> {
    let n = record.sets.len();
    let first = if all { 0 } else { n - 1 };
    let mut written = Vec::new();
    for (j, set) in record.sets.iter().enumerate().skip(first) {
        let path = dir.join(format!("set_{j:05}.txt"));
        std::fs::write(&path, set.to_snapshot(stride))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_uniform(dir: &Path, cfg: &ExperimentConfig, r: &UniformReport) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let stats = &r.outcome.record.stats;
    std::fs::write(dir.join("summary.txt"), uniform_summary(cfg, r))?;
    std::fs::write(
        dir.join("steps.csv"),
        steps_csv(stats, &r.sigma, &r.partial_bounds, r.hausdorff.as_deref()),
    )?;
    std::fs::write(dir.join("discretization.txt"), r.outcome.disc.to_record())?;
    std::fs::write(
        dir.join("timing.csv"),
        format!("phase,seconds\nreach,{}\n", stats.wall_time.as_secs_f64()),
    )?;
    let snaps = dir.join("snapshots");
    std::fs::create_dir_all(&snaps)?;
    write_snapshots(
        &snaps,
        &r.outcome.record,
        cfg.snapshot_stride.unwrap_or(1),
        cfg.snapshot_stride.is_some(),
    )?;
    Ok(())
}

pub fn write_trace(dir: &Path, trace: &RefinementTrace<f64>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("trace.csv"), trace_csv(trace))?;
    std::fs::write(dir.join("thresholds.csv"), thresholds_csv(trace))?;
    let mut timing = String::from("level,reach_seconds,refine_seconds\n");
    for t in &trace.thresholds {
        let _ = writeln!(
            timing,
            "{},{},{}",
            t.level,
            t.reach_time.as_secs_f64(),
            t.refine_time.as_secs_f64()
        );
    }
    std::fs::write(dir.join("timing.csv"), timing)
}

pub fn write_adaptive(dir: &Path, cfg: &ExperimentConfig, r: &AdaptiveReport) -> std::io::Result<()> {
    write_trace(dir, &r.outcome.trace)?;
    let stats = &r.outcome.record.stats;
    std::fs::write(dir.join("summary.txt"), adaptive_summary(cfg, r))?;
    std::fs::write(
        dir.join("steps.csv"),
        steps_csv(stats, &r.sigma, &r.partial_bounds, r.hausdorff.as_deref()),
    )?;
    std::fs::write(dir.join("discretization.txt"), r.outcome.disc.to_record())?;
    let snaps = dir.join("snapshots");
    std::fs::create_dir_all(&snaps)?;
    write_snapshots(
        &snaps,
        &r.outcome.record,
        cfg.snapshot_stride.unwrap_or(1),
        cfg.snapshot_stride.is_some(),
    )?;
    Ok(())
}
