//! The generic semismooth Newton-type iteration on the Bellman residual,
//! plus the classical facades built on it: exact policy iteration, value
//! iteration, and the relaxed alpha-variant of value iteration.
//!
//! Every method iterates `theta <- theta - B_k^{-1} r(theta)` for some
//! nonsingular step matrix `B_k`; the choice of `B_k` is the only difference
//! between the methods (see [`BStrategy`]).

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::bellman::{bellman_sweep, jacobian_for_policy, relax};
use crate::linalg::{self, LinalgError, Matrix};
use crate::mdp::{CostVector, Mdp, MdpError, Policy};

/// Iterates whose infinity norm passes this bound abort with
/// [`SolveStatus::Diverged`]; forced runs below the contraction threshold
/// can grow without bound and the harness has to survive them.
pub const DIVERGENCE_GUARD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error(
        "alpha = {alpha} is not above the global convergence threshold (1+gamma)/2 = {threshold}; \
         set force to run anyway"
    )]
    AlphaBelowThreshold { alpha: f64, threshold: f64 },
    #[error("cost vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("linear solve broke down at iteration {iteration}: {source}")]
    LinearSolveAt {
        iteration: usize,
        #[source]
        source: LinalgError,
    },
    #[error("linear solve broke down: {0}")]
    LinearSolve(#[from] LinalgError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

/// Rule producing the step matrix B_k of the Newton-type iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BStrategy {
    /// B_k = I: the step reduces to `theta <- T theta` (value iteration);
    /// computed directly, no linear solve.
    Identity,
    /// B_k = alpha I with alpha != 0: the relaxed update
    /// `theta <- ((alpha-1)/alpha) theta + (1/alpha) T theta`.
    ScaledIdentity(f64),
    /// B_k = I - gamma P^pi for the canonical greedy policy at theta_k;
    /// always nonsingular. One step per policy evaluation (exact policy
    /// iteration viewed as a Newton method).
    GeneralizedJacobian,
}

impl BStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BStrategy::Identity => "identity",
            BStrategy::ScaledIdentity(_) => "scaled-identity",
            BStrategy::GeneralizedJacobian => "generalized-jacobian",
        }
    }

    pub(crate) fn check(&self) -> Result<(), SolveError> {
        match self {
            BStrategy::ScaledIdentity(alpha) if *alpha == 0.0 => Err(SolveError::ZeroAlpha),
            _ => Ok(()),
        }
    }
}

/// Stopping rule, iteration budget and trace recording options.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Residual threshold: stop once ||r(theta_k)||_inf <= tol.
    pub tol: f64,
    /// When set, the threshold is `tol * (1 + ||theta_k||_inf)` instead.
    pub relative_tol: bool,
    pub max_iters: usize,
    /// Record a per-iteration trace on the result.
    pub record_trace: bool,
    /// Store each iterate vector in the trace. Disable to bound memory on
    /// long runs; residuals and reference errors are still recorded.
    pub record_thetas: bool,
    /// Store the greedy policy of each iterate in the trace. Same memory
    /// consideration as `record_thetas`.
    pub record_policies: bool,
    /// High-accuracy solution used to fill the per-iteration error column.
    pub reference: Option<CostVector>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            relative_tol: false,
            max_iters: 100_000,
            record_trace: false,
            record_thetas: true,
            record_policies: true,
            reference: None,
        }
    }
}

impl SolverConfig {
    /// Default budget for policy iteration; each iteration costs a dense
    /// factorization, so the cap is much smaller than the fixed-point one.
    pub fn for_policy_iteration() -> Self {
        SolverConfig {
            max_iters: 10_000,
            ..SolverConfig::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_relative_tol(mut self, relative: bool) -> Self {
        self.relative_tol = relative;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn with_thetas(mut self, record: bool) -> Self {
        self.record_thetas = record;
        self
    }

    pub fn with_policies(mut self, record: bool) -> Self {
        self.record_policies = record;
        self
    }

    pub fn with_reference(mut self, reference: CostVector) -> Self {
        self.reference = Some(reference);
        self
    }

    fn threshold(&self, theta_norm: f64) -> f64 {
        if self.relative_tol {
            self.tol * (1.0 + theta_norm)
        } else {
            self.tol
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Diverged,
}

/// One recorded iterate.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub k: usize,
    /// The iterate itself; absent when theta recording is disabled.
    pub theta: Option<CostVector>,
    pub residual_inf: f64,
    /// Canonical greedy policy at this iterate.
    pub policy: Option<Policy>,
    /// ||theta_k - reference||_inf when a reference was supplied.
    pub error_inf: Option<f64>,
    /// Filled by `diagnostics::kappa_sequence`; solvers leave it empty.
    pub kappa: Option<f64>,
    /// Time spent producing this iterate (informative only).
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Final iterate.
    pub theta: CostVector,
    /// Canonical greedy policy at the final iterate.
    pub policy: Policy,
    /// Steps taken (policy iteration: evaluations performed).
    pub iterations: usize,
    pub status: SolveStatus,
    pub trace: Option<IterationTrace>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

struct TraceRecorder<'c> {
    config: &'c SolverConfig,
    trace: Option<IterationTrace>,
    clock: Instant,
}

impl<'c> TraceRecorder<'c> {
    fn new(config: &'c SolverConfig) -> Self {
        TraceRecorder {
            config,
            trace: config.record_trace.then(IterationTrace::default),
            clock: Instant::now(),
        }
    }

    fn record(&mut self, k: usize, theta: &CostVector, residual_inf: f64, policy: &Policy) {
        let Some(trace) = &mut self.trace else { return };
        let wall_time = self.clock.elapsed();
        self.clock = Instant::now();
        trace.entries.push(TraceEntry {
            k,
            theta: self.config.record_thetas.then(|| theta.clone()),
            residual_inf,
            policy: self.config.record_policies.then(|| policy.clone()),
            error_inf: self
                .config
                .reference
                .as_ref()
                .map(|r| theta.inf_distance(r)),
            kappa: None,
            wall_time,
        });
    }

    fn finish(self) -> Option<IterationTrace> {
        self.trace
    }
}

/// Generic Newton-type iteration `theta_{k+1} = theta_k - B_k^{-1} r(theta_k)`
/// with the step matrix chosen per `strategy`, stopping once the residual
/// passes the threshold or the budget runs out.
///
/// Non-convergence is reported in the result status, not as an error; only
/// invalid inputs and linear-solver breakdown produce `Err`.
pub fn newton_type_solve(
    mdp: &Mdp,
    strategy: BStrategy,
    theta0: &CostVector,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    strategy.check()?;
    if theta0.len() != mdp.n() {
        return Err(SolveError::DimensionMismatch {
            expected: mdp.n(),
            found: theta0.len(),
        });
    }

    let mut recorder = TraceRecorder::new(config);
    let mut theta = theta0.clone();
    let mut k = 0usize;
    let status;
    let final_policy;

    loop {
        let sweep = bellman_sweep(mdp, theta.values());
        let t = CostVector::new(sweep.t);
        let policy = Policy::new(sweep.greedy);
        let residual_inf = theta.inf_distance(&t);
        recorder.record(k, &theta, residual_inf, &policy);

        if residual_inf <= config.threshold(theta.inf_norm()) {
            status = SolveStatus::Converged;
            final_policy = policy;
            break;
        }
        if theta.inf_norm() > DIVERGENCE_GUARD {
            status = SolveStatus::Diverged;
            final_policy = policy;
            break;
        }
        if k >= config.max_iters {
            status = SolveStatus::MaxIters;
            final_policy = policy;
            break;
        }

        theta = match strategy {
            BStrategy::Identity => t,
            BStrategy::ScaledIdentity(alpha) => {
                if alpha == 1.0 {
                    t
                } else {
                    relax(&theta, &t, alpha)
                }
            }
            BStrategy::GeneralizedJacobian => {
                let jacobian = jacobian_for_policy(mdp, &policy);
                let residual: Vec<f64> = theta
                    .values()
                    .iter()
                    .zip(t.values())
                    .map(|(th, tv)| th - tv)
                    .collect();
                let step = linalg::solve(&jacobian, &residual).map_err(|source| {
                    SolveError::LinearSolveAt {
                        iteration: k,
                        source,
                    }
                })?;
                CostVector::new(
                    theta
                        .values()
                        .iter()
                        .zip(&step)
                        .map(|(th, d)| th - d)
                        .collect(),
                )
            }
        };
        k += 1;
    }

    Ok(SolveResult {
        theta,
        policy: final_policy,
        iterations: k,
        status,
        trace: recorder.finish(),
    })
}

/// Cost of a fixed policy: the unique solution of
/// `(I - gamma P^pi) V = g^pi`, via LU factorization.
pub fn policy_evaluation(mdp: &Mdp, pi: &Policy) -> Result<CostVector, SolveError> {
    mdp.check_policy(pi)?;
    let jacobian = jacobian_for_policy(mdp, pi);
    let g_pi: Vec<f64> = (0..mdp.n()).map(|s| mdp.cost(s, pi.action(s))).collect();
    // I - gamma P^pi is strictly diagonally dominant, so breakdown cannot
    // occur for valid input; surfaced anyway.
    let v = linalg::solve(&jacobian, &g_pi)?;
    Ok(CostVector::new(v))
}

/// Exact policy iteration: alternate policy evaluation and canonical greedy
/// improvement until the evaluated cost's residual passes the threshold.
///
/// `iterations` on the result counts policy evaluations. The trace records
/// one entry per evaluated cost vector.
pub fn policy_iteration(
    mdp: &Mdp,
    pi0: &Policy,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    mdp.check_policy(pi0)?;
    let mut recorder = TraceRecorder::new(config);
    let mut pi = pi0.clone();
    let mut evaluations = 0usize;

    loop {
        let theta = policy_evaluation(mdp, &pi).map_err(|e| match e {
            SolveError::LinearSolve(source) => SolveError::LinearSolveAt {
                iteration: evaluations,
                source,
            },
            other => other,
        })?;
        evaluations += 1;

        let sweep = bellman_sweep(mdp, theta.values());
        let t = CostVector::new(sweep.t);
        let improved = Policy::new(sweep.greedy);
        let residual_inf = theta.inf_distance(&t);
        recorder.record(evaluations - 1, &theta, residual_inf, &improved);

        if residual_inf <= config.threshold(theta.inf_norm()) {
            return Ok(SolveResult {
                theta,
                policy: improved,
                iterations: evaluations,
                status: SolveStatus::Converged,
                trace: recorder.finish(),
            });
        }
        if evaluations >= config.max_iters {
            return Ok(SolveResult {
                theta,
                policy: improved,
                iterations: evaluations,
                status: SolveStatus::MaxIters,
                trace: recorder.finish(),
            });
        }
        pi = improved;
    }
}

/// Value iteration `theta <- T theta`: the Newton-type loop with B_k = I.
pub fn value_iteration(
    mdp: &Mdp,
    theta0: &CostVector,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    newton_type_solve(mdp, BStrategy::Identity, theta0, config)
}

/// Relaxed value iteration with B_k = alpha I.
///
/// Without `force`, alpha must exceed the global contraction threshold
/// `(1 + gamma) / 2`. With `force` any nonzero alpha runs, relying on the
/// divergence guard to stop runaway iterates.
pub fn alpha_value_iteration(
    mdp: &Mdp,
    alpha: f64,
    theta0: &CostVector,
    config: &SolverConfig,
    force: bool,
) -> Result<SolveResult, SolveError> {
    if alpha == 0.0 {
        return Err(SolveError::ZeroAlpha);
    }
    let threshold = (1.0 + mdp.gamma()) / 2.0;
    if !force && alpha <= threshold {
        return Err(SolveError::AlphaBelowThreshold { alpha, threshold });
    }
    newton_type_solve(mdp, BStrategy::ScaledIdentity(alpha), theta0, config)
}

/// Direct dense solve of `A x = b` (LU with partial pivoting).
pub fn linear_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    Ok(linalg::solve(a, b)?)
}
