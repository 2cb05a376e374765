//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setreach::refine::{cost_estimate, delta_cost, error_components, AdaptiveOptions, CostModel, VolumeSplines};
use setreach::{
    algorithm_adaptive, algorithm_uniform, default_ladder, delta_error, error_partial_sums, error_total,
    hausdorff_to_box, make_exponential_system, make_michaelis_menten, project_box, random_conforming, Discretization,
    EulerOptions, IntervalBox, ReachError, RunRecord, SystemSpec,
};

// Reference grid-point counts and their tolerances.
const UNIFORM_REL_TOL: f64 = 0.10;
const ADAPTIVE_FACTOR: f64 = 3.0;
const UNIFORM_D1_L1_EPS_QUARTER: f64 = 5.8e3;
const UNIFORM_D1_L1_EPS_EIGHTH: f64 = 8.3e4;
const UNIFORM_D2_L1_EPS_QUARTER: f64 = 2.7e6;
const ADAPTIVE_D1_L1_EPS_QUARTER: f64 = 1.7e3;
const ADAPTIVE_D2_L1_EPS_QUARTER: f64 = 1.1e5;
const MM_UNIFORM: f64 = 7.8e5;
const MM_ADAPTIVE: f64 = 9.6e4;
const SMALL_CELL_TIME: Duration = Duration::from_secs(5);
const D2_CELL_TIME: Duration = Duration::from_secs(120);
const MM_TOTAL_TIME: Duration = Duration::from_secs(300);
const DELTA_REL_TOL: f64 = 1e-10;
const DELTA_SAMPLES: usize = 200;
const PROJECTION_SAMPLES: usize = 100;
const PROJECTION_SLACK: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_rel(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol * target
}

fn within_factor(value: f64, target: f64, factor: f64) -> bool {
    value >= target / factor && value <= target * factor
}

fn exp_system(d: usize, l: f64) -> SystemSpec<f64> {
    make_exponential_system(d, l).unwrap()
}

fn adaptive_to(system: &SystemSpec<f64>, target: f64) -> Result<setreach::AdaptiveOutcome<f64>, String> {
    let (l, p) = (system.lipschitz(), system.bound());
    let initial = Discretization::initial(system.horizon(), l, p).map_err(|e| e.to_string())?;
    let ladder = default_ladder(error_total(&initial, l, p), target).map_err(|e| e.to_string())?;
    algorithm_adaptive(system, &ladder, &AdaptiveOptions::default()).map_err(|e| e.to_string())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn uniform_counts() -> Outcome {
    let mut notes = Vec::new();
    for &(d, eps, target, limit) in &[
        (1, 0.25, UNIFORM_D1_L1_EPS_QUARTER, SMALL_CELL_TIME),
        (1, 0.125, UNIFORM_D1_L1_EPS_EIGHTH, SMALL_CELL_TIME),
        (2, 0.25, UNIFORM_D2_L1_EPS_QUARTER, D2_CELL_TIME),
    ] {
        let sys = exp_system(d, 1.0);
        let (out, took) = timed(|| algorithm_uniform(&sys, eps, &EulerOptions::default()));
        let cost = out.map_err(|e| e.to_string())?.record.total_cost() as f64;
        ensure(
            within_rel(cost, target, UNIFORM_REL_TOL),
            format!("d={d} eps={eps}: {cost} vs {target}"),
        )?;
        ensure(took < limit, format!("d={d} eps={eps}: took {took:?}"))?;
        notes.push(format!("d={d} eps={eps}: {cost} in {:.2}s", took.as_secs_f64()));
    }
    Ok(notes.join("; "))
}

fn adaptive_counts() -> Outcome {
    let mut notes = Vec::new();
    for &(d, target) in &[(1, ADAPTIVE_D1_L1_EPS_QUARTER), (2, ADAPTIVE_D2_L1_EPS_QUARTER)] {
        let sys = exp_system(d, 1.0);
        let adaptive = adaptive_to(&sys, 0.25)?.record.total_cost() as f64;
        let uniform = algorithm_uniform(&sys, 0.25, &EulerOptions::default()).map_err(|e| e.to_string())?;
        let uniform = uniform.record.total_cost() as f64;
        ensure(
            within_factor(adaptive, target, ADAPTIVE_FACTOR),
            format!("d={d}: {adaptive} vs {target}"),
        )?;
        ensure(
            adaptive < uniform,
            format!("d={d}: adaptive {adaptive} not below uniform {uniform}"),
        )?;
        notes.push(format!("d={d}: adaptive {adaptive} vs uniform {uniform}"));
    }
    Ok(notes.join("; "))
}

fn michaelis_menten_counts() -> Outcome {
    let sys = make_michaelis_menten::<f64>();
    let start = Instant::now();
    let uniform = algorithm_uniform(&sys, 0.125, &EulerOptions::default()).map_err(|e| e.to_string())?;
    let uniform = uniform.record.total_cost() as f64;
    let adaptive = adaptive_to(&sys, 0.125)?.record.total_cost() as f64;
    let took = start.elapsed();
    ensure(
        within_rel(uniform, MM_UNIFORM, UNIFORM_REL_TOL),
        format!("uniform {uniform} vs {MM_UNIFORM}"),
    )?;
    ensure(
        within_factor(adaptive, MM_ADAPTIVE, ADAPTIVE_FACTOR),
        format!("adaptive {adaptive} vs {MM_ADAPTIVE}"),
    )?;
    ensure(took < MM_TOTAL_TIME, format!("took {took:?}"))?;
    Ok(format!(
        "uniform {uniform}, adaptive {adaptive}, {:.2}s",
        took.as_secs_f64()
    ))
}

fn violations(sys: &SystemSpec<f64>, record: &RunRecord<f64>) -> Result<usize, String> {
    let disc = record.disc();
    let bounds = error_partial_sums(disc, sys.lipschitz(), sys.bound());
    let mut bad = 0;
    for (k, set) in record.sets.iter().enumerate() {
        let exact = sys.exact_reachable_box(disc.nodes()[k]).map_err(|e| e.to_string())?;
        let dist = hausdorff_to_box(set, &exact).map_err(|e| e.to_string())?;
        if dist > bounds[k] {
            bad += 1;
        }
    }
    Ok(bad)
}

fn soundness() -> Outcome {
    let mut checked = 0;
    let mut notes = Vec::new();
    for &(d, l, eps) in &[(1, 1.0, 0.25), (1, 2.0, 2.0), (2, 1.0, 0.25), (2, 2.0, 2.0)] {
        let sys = exp_system(d, l);
        let adaptive = adaptive_to(&sys, eps)?;
        let mut bad = violations(&sys, &adaptive.record)?;
        checked += adaptive.record.sets.len();
        // the uniform d=2, L=2 run exceeds the point cap and is left out
        if !(d == 2 && l == 2.0) {
            let uniform = algorithm_uniform(&sys, eps, &EulerOptions::default()).map_err(|e| e.to_string())?;
            bad += violations(&sys, &uniform.record)?;
            checked += uniform.record.sets.len();
        }
        ensure(bad == 0, format!("d={d} L={l}: {bad} violations"))?;
        notes.push(format!("d={d} L={l}"));
    }
    Ok(format!("{checked} sets, 0 violations ({})", notes.join(", ")))
}

fn random_model(rng: &mut ChaCha8Rng) -> CostModel<f64> {
    let mut ts: Vec<f64> = (0..rng.gen_range(0..8)).map(|_| rng.gen_range(0.0..1.0)).collect();
    ts.extend([0.0, 1.0]);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let vr = ts.iter().map(|_| rng.gen_range(0.05..20.0)).collect();
    let vf = ts.iter().map(|_| rng.gen_range(0.05..20.0)).collect();
    CostModel::new(
        VolumeSplines::new(ts, vr, vf).unwrap(),
        rng.gen_range(1..=3),
        rng.gen_range(0..=3),
    )
}

fn delta_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut indices = 0;
    let mut worst_e = 0.0f64;
    let mut worst_c = 0.0f64;
    for sample in 0..DELTA_SAMPLES {
        let l: f64 = rng.gen_range(0.25..4.0);
        let p = l * l.exp();
        let refinements = rng.gen_range(0..60);
        let disc = random_conforming(&mut rng, 1.0, l, p, refinements).map_err(|e| e.to_string())?;
        let model = random_model(&mut rng);
        let e = error_total(&disc, l, p);
        let c = cost_estimate(&disc, &model);
        let comps = error_components(&disc, l, p);
        for (k, comp) in comps.iter().enumerate() {
            let child = disc.subdivide(k).map_err(|e| e.to_string())?;
            let de = delta_error(&disc, l, p, k).map_err(|e| e.to_string())?;
            let dc = delta_cost(&disc, &model, k).map_err(|e| e.to_string())?;
            let rel_e = (de - (error_total(&child, l, p) - e)).abs() / e.abs();
            let rel_c = (dc - (cost_estimate(&child, &model) - c)).abs() / c.abs();
            worst_e = worst_e.max(rel_e);
            worst_c = worst_c.max(rel_c);
            ensure(
                rel_e <= DELTA_REL_TOL,
                format!("sample {sample} k={k}: error delta off by {rel_e:e}"),
            )?;
            ensure(
                rel_c <= DELTA_REL_TOL,
                format!("sample {sample} k={k}: cost delta off by {rel_c:e}"),
            )?;
            ensure(
                de <= -0.5 * comp,
                format!("sample {sample} k={k}: decrease {de} above -E_k/2"),
            )?;
            indices += 1;
        }
    }
    Ok(format!(
        "{DELTA_SAMPLES} discretizations, {indices} indices, worst rel {worst_e:.1e}/{worst_c:.1e}"
    ))
}

fn structural_invariants() -> Outcome {
    let mut total_steps = 0;
    let configs: Vec<(String, SystemSpec<f64>, f64)> = vec![
        ("exp d=1 L=1".into(), exp_system(1, 1.0), 0.25),
        ("exp d=1 L=2".into(), exp_system(1, 2.0), 2.0),
        ("exp d=2 L=1".into(), exp_system(2, 1.0), 0.25),
        ("exp d=2 L=2".into(), exp_system(2, 2.0), 2.0),
        ("michaelis-menten".into(), make_michaelis_menten(), 0.125),
    ];
    for (name, sys, eps) in &configs {
        let (l, p) = (sys.lipschitz(), sys.bound());
        let out = adaptive_to(sys, *eps).map_err(|e| format!("{name}: did not terminate cleanly: {e}"))?;
        let initial = Discretization::initial(sys.horizon(), l, p).map_err(|e| e.to_string())?;
        let mut previous = f64::INFINITY;
        let last = out
            .trace
            .replay(initial, |d| {
                let e = error_total(d, l, p);
                if e >= previous || e.is_nan() {
                    return Err(ReachError::Invariant(format!(
                        "E not strictly decreasing: {previous} -> {e}"
                    )));
                }
                previous = e;
                d.check_structure(l, p)
            })
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(last == out.disc, format!("{name}: replay diverged"))?;
        ensure(
            error_total(&out.disc, l, p) <= *eps,
            format!("{name}: final bound above target"),
        )?;
        total_steps += out.trace.iterations.len();
    }
    Ok(format!("{} traces, {total_steps} subdivisions checked", configs.len()))
}

fn estimator_quality() -> Outcome {
    let mut notes = Vec::new();
    for &(l, eps) in &[(1.0, 0.25), (2.0, 2.0)] {
        let out = adaptive_to(&exp_system(1, l), eps)?;
        let planned: Vec<(f64, f64)> = out
            .trace
            .thresholds
            .iter()
            .filter_map(|t| t.delta_cost.map(|dc| (dc, t.stats.error_bound)))
            .collect();
        ensure(
            planned.len() >= 3,
            format!("L={l}: only {} planned runs", planned.len()),
        )?;
        let (first, last) = (planned[0].0, planned[planned.len() - 1].0);
        ensure(
            last < first,
            format!("L={l}: final delta_C {last} not below first {first}"),
        )?;
        let tail = &planned[planned.len() - 3..];
        ensure(
            tail.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1),
            format!("L={l}: last three thresholds not decreasing: {tail:?}"),
        )?;
        notes.push(format!("L={l}: {first:.3} -> {last:.3}"));
    }
    Ok(notes.join("; "))
}

fn projection_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0c5);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..PROJECTION_SAMPLES {
        let dim = rng.gen_range(1..=3);
        let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        // every fifth box is degenerate in all axes
        let hi: Vec<f64> = lo
            .iter()
            .map(|l| if i % 5 == 0 { *l } else { l + rng.gen_range(0.0..3.0) })
            .collect();
        let rho = rng.gen_range(0.01..2.0);
        let b = IntervalBox::new(lo, hi).map_err(|e| e.to_string())?;
        let p = project_box(&b, rho).map_err(|e| e.to_string())?;
        ensure(!p.is_empty(), format!("box {i}: empty projection"))?;
        let excess = hausdorff_to_box(&p, &b).map_err(|e| e.to_string())? - rho / 2.0;
        worst = worst.max(excess);
        ensure(
            excess <= PROJECTION_SLACK,
            format!("box {i}: distance exceeds rho/2 by {excess:e}"),
        )?;
    }
    Ok(format!(
        "{PROJECTION_SAMPLES} boxes, worst excess over rho/2 {worst:.1e}"
    ))
}

fn cap_trigger() -> Outcome {
    let sys = exp_system(2, 4.0);
    let (result, took) = timed(|| algorithm_uniform(&sys, 4.0, &EulerOptions::default()));
    match result {
        Err(ReachError::CapExceeded {
            step,
            steps,
            points,
            cap,
        }) => Ok(format!(
            "stopped at step {step}/{steps}: {points} > {cap} after {:.2}s",
            took.as_secs_f64()
        )),
        Err(e) => Err(format!("unexpected error {e}")),
        Ok(out) => Err(format!(
            "finished with {} points instead of stopping",
            out.record.total_cost()
        )),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 uniform grid-point counts", uniform_counts),
        ("2 adaptive grid-point counts", adaptive_counts),
        ("3 michaelis-menten counts", michaelis_menten_counts),
        ("4 error-bound soundness", soundness),
        ("5 closed-form delta oracles", delta_oracles),
        ("6 structural invariants", structural_invariants),
        ("7 estimator quality", estimator_quality),
        ("8 projection property", projection_property),
        ("cap trigger on d=2 L=4 eps=4", cap_trigger),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL ({detail})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
