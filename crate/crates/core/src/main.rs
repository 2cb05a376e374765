use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use setreach::bench::output;
use setreach::bench::{self, BenchError, ExperimentConfig, SystemKind};

#[derive(Parser)]
#[command(
    name = "setreach",
    version,
    about = "Reachable sets of differential inclusions on adaptive space-time grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Key-value config file, or `-` for a JSON object on stdin. Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// exponential | michaelis-menten
    #[arg(long, global = true)]
    system: Option<SystemKind>,
    /// Growth rate of the exponential system.
    #[arg(long = "L", global = true)]
    rate: Option<f64>,
    /// State dimension of the exponential system.
    #[arg(long, global = true)]
    d: Option<usize>,
    /// Target tolerance.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Explicit tolerance ladder, comma separated and strictly decreasing.
    #[arg(long, global = true, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    #[arg(long = "dim-r", global = true)]
    dim_r: Option<u32>,
    #[arg(long = "dim-f", global = true)]
    dim_f: Option<u32>,
    /// Maximum lattice points one Euler run may compute.
    #[arg(long, global = true)]
    cap: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write every set, keeping every n-th lattice index per axis.
    #[arg(long = "snapshot-stride", global = true)]
    snapshot_stride: Option<i64>,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform discretization sized by the a-priori bound.
    RunUniform,
    /// Greedy adaptive refinement over a tolerance ladder.
    RunAdaptive,
    /// Both algorithms on one configuration, plus a comparison row.
    Compare,
    /// Compare over a grid of exponential-system cells.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0])]
        rates: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        tolerances: Vec<f64>,
    },
    /// CSV series for the profile, estimator and step-size plots.
    EmitFigureData,
    /// Run the built-in invariant checks.
    Selftest,
}

fn load_config(c: &Common) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    macro_rules! set {
        ($field:ident, $src:expr) => {
            if let Some(v) = $src.clone() {
                cfg.$field = v;
            }
        };
    }
    set!(system, c.system);
    set!(rate, c.rate);
    set!(d, c.d);
    set!(cap, c.cap);
    set!(workers, c.workers);
    set!(out, c.out);
    set!(seed, c.seed);
    if c.eps.is_some() {
        cfg.eps = c.eps;
    }
    if c.ladder.is_some() {
        cfg.ladder = c.ladder.clone();
    }
    if c.dim_r.is_some() {
        cfg.dim_r = c.dim_r;
    }
    if c.dim_f.is_some() {
        cfg.dim_f = c.dim_f;
    }
    if c.snapshot_stride.is_some() {
        cfg.snapshot_stride = c.snapshot_stride;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_partial(dir: &Path, err: &BenchError) {
    if let BenchError::Adaptive(f) = err {
        if let Err(e) = output::write_trace(dir, &f.trace) {
            eprintln!("could not write partial trace: {e}");
        }
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let cfg = load_config(&cli.common)?;
    let out = cfg.out.clone();
    match cli.command {
        Command::RunUniform => {
            let r = bench::run_uniform(&cfg)?;
            output::write_uniform(&out, &cfg, &r)?;
            print!("{}", output::uniform_summary(&cfg, &r));
        }
        Command::RunAdaptive => {
            let r = bench::run_adaptive(&cfg).inspect_err(|e| write_partial(&out, e))?;
            output::write_adaptive(&out, &cfg, &r)?;
            print!("{}", output::adaptive_summary(&cfg, &r));
        }
        Command::Compare => {
            let c = bench::compare(&cfg)?;
            if let Some(u) = &c.uniform {
                output::write_uniform(&out.join("uniform"), &cfg, u)?;
            }
            if let Some(a) = &c.adaptive {
                output::write_adaptive(&out.join("adaptive"), &cfg, a)?;
            }
            std::fs::create_dir_all(&out)?;
            let table = output::comparison_csv(std::slice::from_ref(&c.row));
            std::fs::write(out.join("comparison.csv"), &table)?;
            print!("{table}");
        }
        Command::Sweep {
            dims,
            rates,
            tolerances,
        } => {
            let tolerances = if tolerances.is_empty() {
                vec![cfg.target()?]
            } else {
                tolerances
            };
            let rows = bench::sweep(&cfg, &dims, &rates, &tolerances)?;
            std::fs::create_dir_all(&out)?;
            let table = output::comparison_csv(&rows);
            std::fs::write(out.join("sweep.csv"), &table)?;
            print!("{table}");
        }
        Command::EmitFigureData => {
            for path in bench::emit_figure_data(&cfg, &out)? {
                println!("{}", path.display());
            }
        }
        Command::Selftest => {
            let checks = bench::selftest::run_all(cfg.seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().any(|c| !c.passed) {
                return Err(setreach::ReachError::Invariant("selftest failed".into()).into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
