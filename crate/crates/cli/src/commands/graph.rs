use mdpsolve::bellman::{apply_bellman, apply_t_alpha, greedy_policy};
use mdpsolve::mdp::{CostVector, Mdp};
use mdpsolve::newton::{policy_iteration, SolverConfig};

use super::load_instance;
use crate::output::{csv, fmt_f64};
use crate::{CliError, GraphArgs};

pub fn run(args: GraphArgs) -> Result<(), CliError> {
    let mdp = load_instance(&args.mdp)?;
    if mdp.n() != 1 {
        return Err(CliError::Data(format!(
            "graph needs a single-state instance, this one has {} states",
            mdp.n()
        )));
    }
    if args.samples < 1 {
        return Err(CliError::Usage("samples must be at least 1".into()));
    }
    if args.alphas.contains(&0.0) {
        return Err(CliError::Usage("alpha must be nonzero".into()));
    }
    // NaN bounds must be rejected too, so negate the ordered test
    let range_ok = args.theta_min <= args.theta_max;
    if !range_ok {
        return Err(CliError::Usage(format!(
            "bad theta range [{}, {}]",
            args.theta_min, args.theta_max
        )));
    }

    let mut header: Vec<String> = vec!["theta".into(), "t_theta".into()];
    for &alpha in &args.alphas {
        header.push(format!("t_alpha_{}", fmt_f64(alpha)));
    }
    header.push("fixed_point".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut rows = Vec::with_capacity(args.samples + 1);
    for i in 0..args.samples {
        let theta = if args.samples == 1 {
            args.theta_min
        } else {
            let t = i as f64 / (args.samples - 1) as f64;
            args.theta_min + t * (args.theta_max - args.theta_min)
        };
        rows.push(sample_row(&mdp, theta, &args.alphas, false)?);
    }

    // the fixed point found by policy iteration, appended as a flagged row
    let solved = policy_iteration(
        &mdp,
        &greedy_policy(&mdp, &CostVector::zeros(1)).0,
        &SolverConfig::for_policy_iteration(),
    )
    .map_err(|e| CliError::Data(e.to_string()))?;
    if !solved.converged() {
        return Err(CliError::Data(
            "policy iteration did not converge on this instance".into(),
        ));
    }
    rows.push(sample_row(&mdp, solved.theta[0], &args.alphas, true)?);

    std::fs::write(&args.out, csv(&header_refs, &rows))?;
    println!(
        "wrote {} ({} samples + fixed point)",
        args.out.display(),
        args.samples
    );
    Ok(())
}

fn sample_row(
    mdp: &Mdp,
    theta: f64,
    alphas: &[f64],
    fixed_point: bool,
) -> Result<Vec<String>, CliError> {
    let point = CostVector::new(vec![theta]);
    let mut row = vec![fmt_f64(theta), fmt_f64(apply_bellman(mdp, &point)[0])];
    for &alpha in alphas {
        let value =
            apply_t_alpha(mdp, alpha, &point).map_err(|e| CliError::Usage(e.to_string()))?[0];
        row.push(fmt_f64(value));
    }
    row.push(if fixed_point { "1".into() } else { "0".into() });
    Ok(row)
}
