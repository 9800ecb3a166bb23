//! Ground-truth oracles and rate measurements: brute-force optimal costs,
//! per-iteration contraction ratios, kappa sequences, spectral radius
//! estimates and asymptotic rate predictions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bellman::{greedy_policy, jacobian_for_policy};
use crate::exec;
use crate::linalg::Matrix;
use crate::mdp::{decode_policy, policy_count, CostVector, Mdp, MdpError, Policy};
use crate::newton::{policy_evaluation, BStrategy, IterationTrace, SolveError};

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("only {available} usable contraction ratios, need at least 3")]
    InsufficientData { available: usize },
    #[error("alpha = {alpha} is outside the prediction domain ({lo}, {hi})")]
    AlphaOutOfDomain { alpha: f64, lo: f64, hi: f64 },
    #[error("gamma must lie strictly inside (0,1), got {0}")]
    GammaOutOfRange(f64),
    #[error("tail fraction must lie in (0, 1], got {0}")]
    BadTailFraction(f64),
    #[error("trace entries record neither iterates nor error values")]
    MissingTraceData,
}

/// Optimal cost and an optimal policy by exhaustive policy enumeration.
///
/// Every policy is evaluated exactly and the costs are reduced with the
/// componentwise minimum (exact and order-independent, so the parallel
/// reduction is deterministic). The returned policy is the canonical greedy
/// policy at the minimum, which attains it in every state.
pub fn brute_force_optimal(mdp: &Mdp) -> Result<(CostVector, Policy), DiagnosticsError> {
    let count = policy_count(mdp);
    if count > crate::mdp::DEFAULT_POLICY_CAP as u128 {
        return Err(MdpError::PolicyCapExceeded {
            count,
            cap: crate::mdp::DEFAULT_POLICY_CAP,
        }
        .into());
    }
    let best = exec::min_fold_vectors(count as u64, mdp.n(), |index| {
        let pi = decode_policy(mdp, index);
        policy_evaluation(mdp, &pi)
            .expect("policy evaluation cannot break down on a valid instance")
            .into_values()
    });
    let optimal = CostVector::new(best);
    let (pi, _) = greedy_policy(mdp, &optimal);
    Ok((optimal, pi))
}

/// One per-iteration error ratio `||theta_{k+1} - V*|| / ||theta_k - V*||`.
/// `saturated` marks ratios whose denominator sits at float-noise level
/// (error already collapsed to solver accuracy); their value is meaningless.
#[derive(Debug, Clone, Copy)]
pub struct RatioSample {
    pub k: usize,
    pub ratio: f64,
    pub saturated: bool,
}

/// Per-iteration contraction ratios of a trace against a reference solution.
///
/// Errors come from recorded iterates when present, falling back to the
/// error column recorded at solve time. Entries providing neither are
/// skipped.
pub fn contraction_ratios(trace: &IterationTrace, reference: &CostVector) -> Vec<RatioSample> {
    let saturation = 1e2 * f64::EPSILON * (1.0 + reference.inf_norm());
    let errors: Vec<Option<f64>> = trace
        .entries
        .iter()
        .map(|e| {
            e.theta
                .as_ref()
                .map(|t| t.inf_distance(reference))
                .or(e.error_inf)
        })
        .collect();
    let mut out = Vec::new();
    for k in 0..errors.len().saturating_sub(1) {
        let (Some(num_prev), Some(num_next)) = (errors[k], errors[k + 1]) else {
            continue;
        };
        if num_prev <= saturation {
            out.push(RatioSample {
                k,
                ratio: f64::NAN,
                saturated: true,
            });
        } else {
            out.push(RatioSample {
                k,
                ratio: num_next / num_prev,
                saturated: false,
            });
        }
    }
    out
}

/// Kappa condition samples `kappa_k = ||B_k^{-1} (B_k - J_k)||_inf` along a
/// trace, with `J_k = I - gamma P^{greedy(theta_k)}` and `B_k` from the
/// strategy.
///
/// For `Identity` this is `||I - J_k||_inf = gamma` (row-stochasticity);
/// for `ScaledIdentity(alpha)` it is `||I - J_k / alpha||_inf`; for
/// `GeneralizedJacobian` the difference vanishes and every sample is 0.
pub fn kappa_sequence(
    mdp: &Mdp,
    trace: &IterationTrace,
    strategy: BStrategy,
) -> Result<Vec<f64>, DiagnosticsError> {
    strategy.check()?;
    let mut out = Vec::with_capacity(trace.entries.len());
    for entry in &trace.entries {
        if let BStrategy::GeneralizedJacobian = strategy {
            out.push(0.0);
            continue;
        }
        let policy = match (&entry.policy, &entry.theta) {
            (Some(pi), _) => pi.clone(),
            (None, Some(theta)) => greedy_policy(mdp, theta).0,
            (None, None) => return Err(DiagnosticsError::MissingTraceData),
        };
        let jacobian = jacobian_for_policy(mdp, &policy);
        let n = mdp.n();
        let mut difference = Matrix::zeros(n, n);
        let scale = match strategy {
            BStrategy::Identity => 1.0,
            BStrategy::ScaledIdentity(alpha) => 1.0 / alpha,
            BStrategy::GeneralizedJacobian => unreachable!(),
        };
        for r in 0..n {
            for c in 0..n {
                difference[(r, c)] = -scale * jacobian[(r, c)];
            }
            difference[(r, r)] += 1.0;
        }
        out.push(difference.inf_norm());
    }
    Ok(out)
}

/// Predicted asymptotic contraction rate of the relaxed iteration for
/// `alpha` strictly between `1/(1+gamma)` and 1:
/// `1 - (1-gamma)/alpha` for `alpha >= 1 - gamma/2`, else `1/alpha - 1`.
/// Always below `gamma` on that domain.
pub fn asymptotic_rate_prediction(gamma: f64, alpha: f64) -> Result<f64, DiagnosticsError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(DiagnosticsError::GammaOutOfRange(gamma));
    }
    let lo = 1.0 / (1.0 + gamma);
    if !(alpha > lo && alpha < 1.0) {
        return Err(DiagnosticsError::AlphaOutOfDomain { alpha, lo, hi: 1.0 });
    }
    if alpha >= 1.0 - gamma / 2.0 {
        Ok(1.0 - (1.0 - gamma) / alpha)
    } else {
        Ok(1.0 / alpha - 1.0)
    }
}

/// Power-iteration estimate of the spectral radius with a fixed budget.
///
/// This is an estimate only: convergence is geometric in the gap between
/// the two largest eigenvalue magnitudes and is not guaranteed for
/// defective or complex-dominant spectra.
pub fn spectral_radius_estimate(a: &Matrix, iterations: usize, seed: u64) -> f64 {
    assert!(a.is_square(), "spectral radius needs a square matrix");
    assert!(iterations >= 1, "iteration budget must be positive");
    let n = a.rows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let norm = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    x.iter_mut().for_each(|v| *v /= norm);
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let y = a.mat_vec(&x);
        estimate = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if estimate == 0.0 {
            return 0.0;
        }
        x = y.into_iter().map(|v| v / estimate).collect();
    }
    estimate
}

/// Geometric mean of the non-saturated contraction ratios over the last
/// `tail_fraction` of the trace; the asymptotic rate is a tail property.
pub fn empirical_rate(
    trace: &IterationTrace,
    reference: &CostVector,
    tail_fraction: f64,
) -> Result<f64, DiagnosticsError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(DiagnosticsError::BadTailFraction(tail_fraction));
    }
    let usable: Vec<f64> = contraction_ratios(trace, reference)
        .into_iter()
        .filter(|s| !s.saturated)
        .map(|s| s.ratio)
        .collect();
    if usable.len() < 3 {
        return Err(DiagnosticsError::InsufficientData {
            available: usable.len(),
        });
    }
    let tail_len = ((tail_fraction * usable.len() as f64).ceil() as usize).max(1);
    let tail = &usable[usable.len() - tail_len..];
    let log_mean = tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64;
    Ok(log_mean.exp())
}
