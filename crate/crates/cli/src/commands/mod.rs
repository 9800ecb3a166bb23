pub mod benchmark;
pub mod gen;
pub mod graph;
pub mod solve;
pub mod sweep;

use std::path::Path;

use mdpsolve::mdp::{load_mdp, Mdp};
use mdpsolve::newton::{IterationTrace, SolveStatus};

use crate::output::{fmt_f64, fmt_opt};
use crate::CliError;

/// Read and validate an instance file; both failure kinds are data errors.
pub fn load_instance(path: &Path) -> Result<Mdp, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    load_mdp(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIters => "max-iters",
        SolveStatus::Diverged => "diverged",
    }
}

/// Rows for the trace CSV: `k,residual_inf,error_inf,kappa_k,wall_time_us`.
pub fn trace_rows(trace: &IterationTrace, kappas: Option<&[f64]>) -> Vec<Vec<String>> {
    trace
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                e.k.to_string(),
                fmt_f64(e.residual_inf),
                fmt_opt(e.error_inf),
                fmt_opt(kappas.map(|k| k[i])),
                e.wall_time.as_micros().to_string(),
            ]
        })
        .collect()
}

pub const TRACE_HEADER: [&str; 5] = ["k", "residual_inf", "error_inf", "kappa_k", "wall_time_us"];
