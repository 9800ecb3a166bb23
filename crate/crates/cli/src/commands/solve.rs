use mdpsolve::bellman::greedy_policy;
use mdpsolve::diagnostics::kappa_sequence;
use mdpsolve::mdp::CostVector;
use mdpsolve::newton::{
    alpha_value_iteration, policy_iteration, value_iteration, BStrategy, SolveError, SolveResult,
    SolverConfig,
};

use super::{load_instance, status_str, trace_rows, TRACE_HEADER};
use crate::output::{csv, fmt_f64};
use crate::{CliError, Method, SolveArgs};

pub fn run(args: SolveArgs) -> Result<(), CliError> {
    let mdp = load_instance(&args.mdp)?;
    if args.method == Method::AlphaVi && args.alpha.is_none() {
        return Err(CliError::Usage("alpha-vi needs --alpha".into()));
    }

    let mut config = SolverConfig::default()
        .with_tol(args.tol)
        .with_relative_tol(args.relative_tol)
        .with_trace(args.trace_out.is_some());
    config.max_iters = args.max_iters.unwrap_or(match args.method {
        Method::Pi => SolverConfig::for_policy_iteration().max_iters,
        _ => config.max_iters,
    });

    let theta0 = CostVector::zeros(mdp.n());
    let started = std::time::Instant::now();
    let (name, strategy, result) = match args.method {
        Method::Pi => {
            let pi0 = greedy_policy(&mdp, &theta0).0;
            let result = policy_iteration(&mdp, &pi0, &config).map_err(solve_error)?;
            ("pi", BStrategy::GeneralizedJacobian, result)
        }
        Method::Vi => {
            let result = value_iteration(&mdp, &theta0, &config).map_err(solve_error)?;
            ("vi", BStrategy::Identity, result)
        }
        Method::AlphaVi => {
            let alpha = args.alpha.unwrap();
            let result = alpha_value_iteration(&mdp, alpha, &theta0, &config, args.force)
                .map_err(solve_error)?;
            ("alpha-vi", BStrategy::ScaledIdentity(alpha), result)
        }
    };
    let wall_us = started.elapsed().as_micros();

    let final_residual = mdpsolve::bellman::residual(&mdp, &result.theta).inf_norm();
    print_summary(name, args.alpha, &result, final_residual, wall_us);
    if args.print_solution {
        println!("theta={:?}", result.theta.values());
    }

    if let Some(path) = &args.trace_out {
        let trace = result.trace.as_ref().expect("trace was requested");
        // kappa needs the recorded iterates; fill it when available
        let kappas = kappa_sequence(&mdp, trace, strategy).ok();
        let rows = trace_rows(trace, kappas.as_deref());
        std::fs::write(path, csv(&TRACE_HEADER, &rows))?;
    }

    if result.converged() {
        Ok(())
    } else {
        Err(CliError::NonConvergence(format!(
            "did not converge: status={} after {} iterations",
            status_str(result.status),
            result.iterations
        )))
    }
}

fn print_summary(
    name: &str,
    alpha: Option<f64>,
    result: &SolveResult,
    residual_inf: f64,
    wall_us: u128,
) {
    let alpha_part = match (name, alpha) {
        ("alpha-vi", Some(a)) => format!(" alpha={}", fmt_f64(a)),
        _ => String::new(),
    };
    println!(
        "method={name}{alpha_part} converged={} status={} iterations={} residual_inf={} wall_time_us={wall_us}",
        result.converged(),
        status_str(result.status),
        result.iterations,
        fmt_f64(residual_inf),
    );
}

fn solve_error(e: SolveError) -> CliError {
    match e {
        SolveError::ZeroAlpha | SolveError::AlphaBelowThreshold { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Data(other.to_string()),
    }
}
