//! The Bellman operator family, greedy-policy extraction, the Bellman
//! residual and generalized-Jacobian elements.
//!
//! All operations are pure functions of immutable inputs. For a cost vector
//! theta, the operator value at state s is
//! `min over admissible a of  g(s,a) + gamma * p(.|s,a) . theta`,
//! and the residual is `r(theta) = theta - T theta`, whose unique root is the
//! optimal cost vector.

use thiserror::Error;

use crate::exec;
use crate::linalg::Matrix;
use crate::mdp::{induced_dynamics, CostVector, Mdp, MdpError, Policy};

/// Relative tolerance under which two Q-values count as tied: the tie flag
/// is set when their gap is at most `GREEDY_TIE_RTOL * max(1, |q_min|)`.
/// Action selection itself always takes the lowest index among the exact
/// float minimizers, independent of this tolerance.
pub const GREEDY_TIE_RTOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
#[error("alpha must be nonzero")]
pub struct ZeroAlpha;

/// Per-state outcome of one operator sweep: operator value, canonical
/// greedy action and tie flag, computed in a single pass over the actions.
pub(crate) struct BellmanSweep {
    pub t: Vec<f64>,
    pub greedy: Vec<usize>,
    pub tie: Vec<bool>,
}

pub(crate) fn bellman_sweep(mdp: &Mdp, theta: &[f64]) -> BellmanSweep {
    assert_eq!(
        theta.len(),
        mdp.n(),
        "cost vector length does not match state count"
    );
    let gamma = mdp.gamma();
    let per_state = exec::map_states(mdp.n(), |s| {
        let mut qs: Vec<f64> = Vec::new();
        let mut best = f64::INFINITY;
        let mut best_action = usize::MAX;
        for (a, cost, row) in mdp.actions_of(s) {
            let q = cost + gamma * row.dot(theta);
            if q < best {
                best = q;
                best_action = a;
            }
            qs.push(q);
        }
        assert!(
            best_action != usize::MAX,
            "state {s} has no admissible action"
        );
        let tie_tol = GREEDY_TIE_RTOL * best.abs().max(1.0);
        let tied = qs.iter().filter(|&&q| q - best <= tie_tol).count() >= 2;
        (best, best_action, tied)
    });
    let mut sweep = BellmanSweep {
        t: Vec::with_capacity(mdp.n()),
        greedy: Vec::with_capacity(mdp.n()),
        tie: Vec::with_capacity(mdp.n()),
    };
    for (t, a, tie) in per_state {
        sweep.t.push(t);
        sweep.greedy.push(a);
        sweep.tie.push(tie);
    }
    sweep
}

/// Bellman operator: componentwise minimum over admissible actions of the
/// one-step cost plus discounted continuation.
pub fn apply_bellman(mdp: &Mdp, theta: &CostVector) -> CostVector {
    CostVector::new(bellman_sweep(mdp, theta.values()).t)
}

/// Policy Bellman operator `T^pi theta = g^pi + gamma P^pi theta`.
pub fn apply_policy_bellman(
    mdp: &Mdp,
    pi: &Policy,
    theta: &CostVector,
) -> Result<CostVector, MdpError> {
    mdp.check_policy(pi)?;
    assert_eq!(
        theta.len(),
        mdp.n(),
        "cost vector length does not match state count"
    );
    let gamma = mdp.gamma();
    let values = exec::map_states(mdp.n(), |s| {
        let a = pi.action(s);
        mdp.cost(s, a) + gamma * mdp.row(s, a).dot(theta.values())
    });
    Ok(CostVector::new(values))
}

/// Canonical greedy policy at `theta` plus a per-state tie flag.
///
/// Selection is deterministic: the lowest action index attaining the exact
/// minimum. The flag marks states where at least two actions reach the
/// minimum within [`GREEDY_TIE_RTOL`].
pub fn greedy_policy(mdp: &Mdp, theta: &CostVector) -> (Policy, Vec<bool>) {
    let sweep = bellman_sweep(mdp, theta.values());
    (Policy::new(sweep.greedy), sweep.tie)
}

/// Bellman residual `r(theta) = theta - T theta`; zero exactly at the
/// optimal cost vector.
pub fn residual(mdp: &Mdp, theta: &CostVector) -> CostVector {
    let t = bellman_sweep(mdp, theta.values()).t;
    let values = theta
        .values()
        .iter()
        .zip(t)
        .map(|(th, tv)| th - tv)
        .collect();
    CostVector::new(values)
}

/// An element of the B-differential of the residual at `theta`:
/// `J = I - gamma P^pi` for the canonical greedy policy pi. J is always
/// nonsingular (P^pi is row-stochastic and gamma < 1).
pub fn b_differential_element(mdp: &Mdp, theta: &CostVector) -> (Matrix, Policy) {
    let (pi, _) = greedy_policy(mdp, theta);
    let j = jacobian_for_policy(mdp, &pi);
    (j, pi)
}

pub(crate) fn jacobian_for_policy(mdp: &Mdp, pi: &Policy) -> Matrix {
    let dyn_ = induced_dynamics(mdp, pi).expect("greedy policy is admissible by construction");
    let n = mdp.n();
    let gamma = mdp.gamma();
    let mut j = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            j[(r, c)] = -gamma * dyn_.p_pi[(r, c)];
        }
        j[(r, r)] += 1.0;
    }
    j
}

/// Relaxed operator `T_alpha theta = ((alpha-1)/alpha) theta + (1/alpha) T theta`.
/// At alpha = 1 this is exactly the Bellman operator (computed as such, so
/// the results agree bit for bit).
pub fn apply_t_alpha(mdp: &Mdp, alpha: f64, theta: &CostVector) -> Result<CostVector, ZeroAlpha> {
    if alpha == 0.0 {
        return Err(ZeroAlpha);
    }
    let t = apply_bellman(mdp, theta);
    if alpha == 1.0 {
        return Ok(t);
    }
    Ok(relax(theta, &t, alpha))
}

/// Combine `theta` and `T theta` into the relaxed update.
pub(crate) fn relax(theta: &CostVector, t: &CostVector, alpha: f64) -> CostVector {
    let c_old = (alpha - 1.0) / alpha;
    let c_new = 1.0 / alpha;
    let values = theta
        .values()
        .iter()
        .zip(t.values())
        .map(|(th, tv)| c_old * th + c_new * tv)
        .collect();
    CostVector::new(values)
}
