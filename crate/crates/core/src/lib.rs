//! Solvers for finite, infinite-horizon discounted Markov decision processes.
//!
//! The central object is the Bellman residual `r(theta) = theta - T theta`,
//! whose unique root is the optimal cost vector. Policy iteration, value
//! iteration and the relaxed alpha-variant of value iteration are all run
//! through one generic Newton-type loop (`newton::newton_type_solve`) that
//! differs only in how the step matrix `B_k` is chosen:
//!
//! * `BStrategy::GeneralizedJacobian` — `B_k = I - gamma * P^pi` for the
//!   canonical greedy policy at the current iterate; one step per policy
//!   evaluation, i.e. exact policy iteration.
//! * `BStrategy::Identity` — `B_k = I`; the step reduces to `theta <- T theta`,
//!   i.e. plain value iteration.
//! * `BStrategy::ScaledIdentity(alpha)` — `B_k = alpha * I`; the step is the
//!   relaxed update `theta <- ((alpha-1)/alpha) theta + (1/alpha) T theta`.
//!
//! The `diagnostics` module provides ground-truth oracles (brute-force policy
//! enumeration) and measurements of the contraction behaviour the three
//! strategies exhibit: per-iteration error ratios, kappa sequences, spectral
//! radius estimates and asymptotic rate predictions.
//!
//! With the default `parallel` feature the per-state kernels and the
//! brute-force enumeration fan out over rayon; disabling the feature yields a
//! dependency-free sequential build with bit-identical results.
//!
//! ```
//! use mdpsolve::mdp::{random_mdp, CostVector};
//! use mdpsolve::newton::{newton_type_solve, BStrategy, SolverConfig};
//! use mdpsolve::diagnostics::brute_force_optimal;
//!
//! let mdp = random_mdp(4, 3, 0.9, 7).unwrap();
//! let config = SolverConfig::default().with_tol(1e-10);
//! let run = newton_type_solve(
//!     &mdp,
//!     BStrategy::GeneralizedJacobian,
//!     &CostVector::zeros(4),
//!     &config,
//! )
//! .unwrap();
//! assert!(run.converged());
//!
//! let (optimal, _) = brute_force_optimal(&mdp).unwrap();
//! assert!(run.theta.inf_distance(&optimal) <= 1e-8);
//! ```

pub mod bellman;
pub mod diagnostics;
mod exec;
pub mod linalg;
pub mod mdp;
pub mod newton;

pub use bellman::{
    apply_bellman, apply_policy_bellman, apply_t_alpha, b_differential_element, greedy_policy,
    residual,
};
pub use linalg::Matrix;
pub use mdp::{
    enumerate_policies, induced_dynamics, load_mdp, random_mdp, save_mdp, validate, CostVector,
    InducedDynamics, Mdp, MdpError, Policy, Violation,
};
pub use newton::{
    alpha_value_iteration, linear_solve, newton_type_solve, policy_evaluation, policy_iteration,
    value_iteration, BStrategy, IterationTrace, SolveError, SolveResult, SolveStatus, SolverConfig,
    TraceEntry,
};
