//! Quick invariant suites runnable from the binary (`setreach selftest`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{random_conforming, Discretization};
use crate::error::Result;
use crate::lattice::{hausdorff_to_box, project_box};
use crate::refine::{
    algorithm_adaptive, cost_estimate, delta_cost, delta_error, error_component, error_total, AdaptiveOptions,
    CostModel, VolumeSplines,
};
use crate::systems::{make_exponential_system, IntervalBox};

use super::experiment::run_uniform;
use super::ExperimentConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<String>) -> Check {
    match outcome {
        Ok(detail) => Check {
            name,
            passed: !detail.starts_with("FAIL"),
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("FAIL {e}"),
        },
    }
}

fn projection(seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=3);
        let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
        let rho = rng.gen_range(0.05..1.5);
        let b = IntervalBox::new(lo, hi)?;
        let p = project_box(&b, rho)?;
        if p.is_empty() {
            return Ok("FAIL empty projection".into());
        }
        let excess = hausdorff_to_box(&p, &b)? - rho / 2.0;
        worst = worst.max(excess);
        if excess > 1e-12 {
            return Ok(format!("FAIL distance exceeds rho/2 by {excess}"));
        }
    }
    Ok(format!("100 boxes, worst excess {worst:e}"))
}

fn deltas(seed: u64) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..50 {
        let l: f64 = rng.gen_range(0.2..4.0);
        let p = l * l.exp();
        let count = rng.gen_range(0..40);
        let disc = random_conforming(&mut rng, 1.0, l, p, count)?;
        let model = CostModel::new(
            VolumeSplines::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 0.5], vec![0.3, 1.0, 3.0])?,
            rng.gen_range(0..3),
            rng.gen_range(0..3),
        );
        let (e, c) = (error_total(&disc, l, p), cost_estimate(&disc, &model));
        for k in 0..=disc.len() {
            let child = disc.subdivide(k)?;
            let de = delta_error(&disc, l, p, k)?;
            let dc = delta_cost(&disc, &model, k)?;
            if (de - (error_total(&child, l, p) - e)).abs() > 1e-10 * e {
                return Ok(format!("FAIL delta_error mismatch at k={k}"));
            }
            if (dc - (cost_estimate(&child, &model) - c)).abs() > 1e-10 * c {
                return Ok(format!("FAIL delta_cost mismatch at k={k}"));
            }
            if de > -0.5 * error_component(&disc, l, p, k) * (1.0 - 1e-12) {
                return Ok(format!("FAIL error decrease below half at k={k}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} indices on 50 discretizations"))
}

fn structure() -> Result<String> {
    let sys = make_exponential_system::<f64>(1, 1.0)?;
    let (l, p) = (sys.lipschitz(), sys.bound());
    let out = algorithm_adaptive(&sys, &[4.0, 2.0, 1.0, 0.5], &AdaptiveOptions::default()).map_err(|f| f.error)?;
    let mut visited = 0;
    out.trace.replay(Discretization::initial(1.0, l, p)?, |d| {
        visited += 1;
        d.check_structure(l, p)
    })?;
    let decreasing = out
        .trace
        .iterations
        .windows(2)
        .all(|w| w[1].error_after < w[0].error_after);
    if !decreasing {
        return Ok("FAIL error bound not strictly decreasing".into());
    }
    Ok(format!("{visited} discretizations along the trace"))
}

fn soundness() -> Result<String> {
    let cfg = ExperimentConfig {
        eps: Some(0.25),
        ..Default::default()
    };
    let r = run_uniform(&cfg).map_err(|e| crate::error::ReachError::Invariant(e.to_string()))?;
    let h = r.hausdorff.expect("exact sets known");
    let violations = h.iter().zip(&r.partial_bounds).filter(|(d, b)| d > b).count();
    if violations > 0 {
        return Ok(format!("FAIL {violations} nodes exceed their bound"));
    }
    Ok(format!("{} nodes within bound", h.len()))
}

pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        check("projection", projection(seed)),
        check("delta-oracles", deltas(seed)),
        check("structure", structure()),
        check("soundness", soundness()),
    ]
}
