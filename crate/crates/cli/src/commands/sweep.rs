use mdpsolve::bellman::greedy_policy;
use mdpsolve::diagnostics::empirical_rate;
use mdpsolve::mdp::CostVector;
use mdpsolve::newton::{alpha_value_iteration, policy_iteration, SolveResult, SolverConfig};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::load_instance;
use crate::output::{csv, fmt_f64};
use crate::{CliError, SweepArgs};

const SWEEP_HEADER: [&str; 4] = ["alpha", "converged", "iterations", "empirical_rate"];

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let mdp = load_instance(&args.mdp)?;
    let grid = alpha_grid(args.alpha_min, args.alpha_max, args.steps)?;

    // PI to high accuracy provides the error reference for the rate column
    let reference = policy_iteration(
        &mdp,
        &greedy_policy(&mdp, &CostVector::zeros(mdp.n())).0,
        &SolverConfig::for_policy_iteration().with_tol(1e-12),
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    if !reference.converged() {
        return Err(CliError::Data(
            "reference policy-iteration run did not converge".into(),
        ));
    }
    let v_star = reference.theta.clone();

    let run_config = SolverConfig::default()
        .with_tol(args.tol)
        .with_max_iters(args.max_iters)
        .with_trace(true)
        .with_thetas(false)
        .with_policies(false)
        .with_reference(v_star.clone());

    // independent solves; rows are collected back in grid order
    let run_one = |&alpha: &f64| -> Result<Vec<String>, CliError> {
        let result =
            alpha_value_iteration(&mdp, alpha, &CostVector::zeros(mdp.n()), &run_config, true)
                .map_err(|e| CliError::Data(e.to_string()))?;
        Ok(sweep_row(
            fmt_f64(alpha),
            &result,
            &v_star,
            args.tail_fraction,
        ))
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<_>, _> = grid.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<_>, _> = grid.iter().map(run_one).collect();
    let mut rows = rows?;

    // PI baseline row, alpha column holds the literal `pi`
    let pi_run = policy_iteration(
        &mdp,
        &greedy_policy(&mdp, &CostVector::zeros(mdp.n())).0,
        &SolverConfig::for_policy_iteration()
            .with_tol(args.tol)
            .with_trace(true)
            .with_reference(v_star.clone()),
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    rows.push(sweep_row("pi".into(), &pi_run, &v_star, args.tail_fraction));

    std::fs::write(&args.out, csv(&SWEEP_HEADER, &rows))?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    Ok(())
}

fn sweep_row(
    label: String,
    result: &SolveResult,
    v_star: &CostVector,
    tail_fraction: f64,
) -> Vec<String> {
    let rate = result
        .trace
        .as_ref()
        .and_then(|t| empirical_rate(t, v_star, tail_fraction).ok())
        .map(fmt_f64)
        .unwrap_or_default();
    vec![
        label,
        result.converged().to_string(),
        result.iterations.to_string(),
        rate,
    ]
}

/// Evenly spaced grid, endpoints included, snapped to 9 decimal places so
/// that decimal inputs produce the exact decimal values (a step landing on
/// 1 yields alpha = 1.0 exactly, which short-circuits to plain value
/// iteration).
fn alpha_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("steps must be at least 1".into()));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(CliError::Usage(format!("bad alpha range [{min}, {max}]")));
    }
    let grid: Vec<f64> = if steps == 1 {
        vec![snap(min)]
    } else {
        (0..steps)
            .map(|i| {
                let t = i as f64 / (steps - 1) as f64;
                snap(min + t * (max - min))
            })
            .collect()
    };
    if grid.contains(&0.0) {
        return Err(CliError::Usage("alpha range must exclude 0".into()));
    }
    Ok(grid)
}

fn snap(alpha: f64) -> f64 {
    (alpha * 1e9).round() / 1e9
}
