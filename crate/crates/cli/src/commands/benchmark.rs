use mdpsolve::bellman::greedy_policy;
use mdpsolve::mdp::{random_mdp, CostVector, Mdp};
use mdpsolve::newton::{
    alpha_value_iteration, policy_iteration, value_iteration, SolveResult, SolverConfig,
};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Deserialize;

use super::status_str;
use crate::output::{csv, fmt_f64, fmt_opt};
use crate::{BenchmarkArgs, CliError};

const BENCH_HEADER: [&str; 7] = [
    "method",
    "alpha",
    "k",
    "residual_inf",
    "error_inf",
    "wall_time_us",
    "status",
];

/// Benchmark spec file: one instance, a list of method runs, shared
/// tolerances. Example:
/// `{"instance":{"n":500,"m":10,"gamma":0.4,"seed":42},
///   "methods":[{"method":"pi"},{"method":"vi"},{"method":"alpha-vi","alpha":0.8}],
///   "tol":1e-10}`
#[derive(Deserialize)]
struct BenchmarkSpec {
    instance: InstanceSpec,
    methods: Vec<MethodSpec>,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    100_000
}

#[derive(Deserialize)]
struct InstanceSpec {
    n: usize,
    m: usize,
    gamma: f64,
    seed: u64,
}

#[derive(Deserialize, Clone)]
struct MethodSpec {
    method: String,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    force: bool,
}

pub fn run(args: BenchmarkArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: BenchmarkSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.spec.display())))?;

    let inst = &spec.instance;
    let mdp = random_mdp(inst.n, inst.m, inst.gamma, inst.seed)
        .map_err(|e| CliError::Data(format!("instance spec: {e}")))?;

    // error column is measured against a high-accuracy PI solution
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

    let run_one = |method: &MethodSpec| method_rows(&mdp, method, &v_star, &spec);
    #[cfg(feature = "parallel")]
    let per_method: Vec<Vec<Vec<String>>> = spec.methods.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let per_method: Vec<Vec<Vec<String>>> = spec.methods.iter().map(run_one).collect();
    let rows: Vec<Vec<String>> = per_method.into_iter().flatten().collect();

    let out_text = csv(&BENCH_HEADER, &rows);
    match &args.out {
        Some(path) => {
            std::fs::write(path, out_text)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
        }
        None => print!("{out_text}"),
    }
    Ok(())
}

/// Rows for one method run; failures become a single row with status
/// `error` instead of aborting the whole benchmark.
fn method_rows(
    mdp: &Mdp,
    method: &MethodSpec,
    v_star: &CostVector,
    spec: &BenchmarkSpec,
) -> Vec<Vec<String>> {
    let config = SolverConfig::default()
        .with_tol(spec.tol)
        .with_max_iters(spec.max_iters)
        .with_trace(true)
        .with_thetas(false)
        .with_policies(false)
        .with_reference(v_star.clone());
    let theta0 = CostVector::zeros(mdp.n());

    let outcome = match method.method.as_str() {
        "pi" => policy_iteration(
            mdp,
            &greedy_policy(mdp, &theta0).0,
            &SolverConfig {
                max_iters: spec.max_iters.min(10_000),
                ..config.clone()
            },
        ),
        "vi" => value_iteration(mdp, &theta0, &config),
        "alpha-vi" => match method.alpha {
            Some(alpha) => alpha_value_iteration(mdp, alpha, &theta0, &config, method.force),
            None => {
                return vec![error_row(method, "alpha-vi entry is missing alpha")];
            }
        },
        other => {
            return vec![error_row(method, &format!("unknown method `{other}`"))];
        }
    };

    match outcome {
        Ok(result) => result_rows(method, &result),
        Err(e) => vec![error_row(method, &e.to_string())],
    }
}

fn result_rows(method: &MethodSpec, result: &SolveResult) -> Vec<Vec<String>> {
    let status = status_str(result.status);
    let trace = result
        .trace
        .as_ref()
        .expect("benchmark runs always record traces");
    trace
        .entries
        .iter()
        .map(|e| {
            vec![
                method.method.clone(),
                method.alpha.map(fmt_f64).unwrap_or_default(),
                e.k.to_string(),
                fmt_f64(e.residual_inf),
                fmt_opt(e.error_inf),
                e.wall_time.as_micros().to_string(),
                status.to_string(),
            ]
        })
        .collect()
}

fn error_row(method: &MethodSpec, message: &str) -> Vec<String> {
    eprintln!("benchmark: {} run failed: {message}", method.method);
    vec![
        method.method.clone(),
        method.alpha.map(fmt_f64).unwrap_or_default(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        "error".to_string(),
    ]
}
