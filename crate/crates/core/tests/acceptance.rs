//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The tiny-instance suite is a fixed protocol: 100 seeded random MDPs
//! cycling n in {2,3,4}, m in {2,3}, gamma in {0.4, 0.9}, seeds 9000..9100.

use mdpsolve::bellman::{apply_bellman, apply_policy_bellman, apply_t_alpha};
use mdpsolve::diagnostics::{brute_force_optimal, empirical_rate, kappa_sequence};
use mdpsolve::mdp::{random_mdp, CostVector, Mdp, Policy};
use mdpsolve::newton::{
    alpha_value_iteration, newton_type_solve, policy_iteration, value_iteration, BStrategy,
    SolverConfig,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TINY_SEED_BASE: u64 = 9000;

fn tiny_instances() -> Vec<Mdp> {
    let ns = [2usize, 3, 4];
    let ms = [2usize, 3];
    let gammas = [0.4f64, 0.9];
    (0..100)
        .map(|i| {
            let n = ns[i % 3];
            let m = ms[(i / 3) % 2];
            let gamma = gammas[(i / 6) % 2];
            random_mdp(n, m, gamma, TINY_SEED_BASE + i as u64).unwrap()
        })
        .collect()
}

fn benchmark_scale_instance(seed: u64) -> Mdp {
    random_mdp(500, 10, 0.4, seed).unwrap()
}

fn traced(tol: f64) -> SolverConfig {
    SolverConfig::default().with_tol(tol).with_trace(true)
}

fn greedy_zero(mdp: &Mdp) -> Policy {
    mdpsolve::bellman::greedy_policy(mdp, &CostVector::zeros(mdp.n())).0
}

/// A policy is optimal iff its one-step image of V* equals T V*.
fn is_optimal(mdp: &Mdp, pi: &Policy, v_star: &CostVector) -> bool {
    let image = apply_policy_bellman(mdp, pi, v_star).unwrap();
    let t = apply_bellman(mdp, v_star);
    image.inf_distance(&t) <= 1e-12 * (1.0 + v_star.inf_norm())
}

#[test]
fn criterion_01_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    for mdp in &tiny_instances() {
        let (v_star, _) = brute_force_optimal(mdp).unwrap();
        let zero = CostVector::zeros(mdp.n());
        let config = SolverConfig::default().with_tol(1e-10);

        let pi_run = policy_iteration(mdp, &greedy_zero(mdp), &config).unwrap();
        assert!(pi_run.converged());
        let vi_run = value_iteration(mdp, &zero, &config).unwrap();
        assert!(vi_run.converged());
        // alpha = 0.8 sits below the global threshold 0.95 when gamma = 0.9,
        // so the run is forced; it still converges locally on these instances
        let avi_run = alpha_value_iteration(mdp, 0.8, &zero, &config, true).unwrap();
        assert!(
            avi_run.converged(),
            "alpha-VI failed to converge (gamma={})",
            mdp.gamma()
        );

        for (name, run) in [("pi", &pi_run), ("vi", &vi_run), ("alpha-vi", &avi_run)] {
            let err = run.theta.inf_distance(&v_star);
            worst = worst.max(err);
            assert!(
                err <= 1e-7,
                "ACCEPTANCE C1 oracle equivalence: FAIL — {name} off by {err:.3e} (gamma={})",
                mdp.gamma()
            );
        }
    }
    println!("ACCEPTANCE C1 oracle equivalence: PASS (worst error {worst:.3e} <= 1e-7)");
}

#[test]
fn criterion_02_policy_iteration_is_newton() {
    let mut worst: f64 = 0.0;
    for mdp in &tiny_instances() {
        let zero = CostVector::zeros(mdp.n());
        let config = traced(1e-10);
        let newton =
            newton_type_solve(mdp, BStrategy::GeneralizedJacobian, &zero, &config).unwrap();
        let pi = policy_iteration(mdp, &greedy_zero(mdp), &config).unwrap();

        let newton_trace = newton.trace.unwrap();
        let pi_trace = pi.trace.unwrap();
        // Newton iterate k+1 is PI's k-th evaluated cost
        assert_eq!(
            newton_trace.len(),
            pi_trace.len() + 1,
            "ACCEPTANCE C2: FAIL — trace lengths diverge ({} newton vs {} pi evaluations)",
            newton_trace.len(),
            pi_trace.len()
        );
        for (k, pi_entry) in pi_trace.entries.iter().enumerate() {
            let newton_theta = newton_trace.entries[k + 1].theta.as_ref().unwrap();
            let pi_theta = pi_entry.theta.as_ref().unwrap();
            let gap = newton_theta.inf_distance(pi_theta);
            worst = worst.max(gap);
            assert!(
                gap <= 1e-10,
                "ACCEPTANCE C2 PI==Newton: FAIL — iterate {k} differs by {gap:.3e}"
            );
        }
    }
    println!("ACCEPTANCE C2 PI==Newton: PASS (worst iterate gap {worst:.3e} <= 1e-10)");
}

#[test]
fn criterion_03_value_iteration_is_fixed_point_newton() {
    for mdp in &tiny_instances() {
        let zero = CostVector::zeros(mdp.n());
        let config = traced(1e-10);
        let vi = value_iteration(mdp, &zero, &config).unwrap();
        let newton = newton_type_solve(mdp, BStrategy::Identity, &zero, &config).unwrap();
        assert_eq!(vi.iterations, newton.iterations);
        let (vt, nt) = (vi.trace.unwrap(), newton.trace.unwrap());
        assert_eq!(vt.len(), nt.len());
        for (a, b) in vt.entries.iter().zip(&nt.entries) {
            let (ta, tb) = (a.theta.as_ref().unwrap(), b.theta.as_ref().unwrap());
            for s in 0..ta.len() {
                assert_eq!(
                    ta[s].to_bits(),
                    tb[s].to_bits(),
                    "ACCEPTANCE C3 VI==fixed-point: FAIL — bit mismatch at k={} s={s}",
                    a.k
                );
            }
        }
    }
    println!("ACCEPTANCE C3 VI==fixed-point: PASS (bit-identical iterate sequences)");
}

#[test]
fn criterion_04_vi_gamma_contraction() {
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for mdp in &tiny_instances() {
        let (v_star, _) = brute_force_optimal(mdp).unwrap();
        let config = traced(1e-10).with_reference(v_star.clone());
        let run = value_iteration(mdp, &CostVector::zeros(mdp.n()), &config).unwrap();
        let trace = run.trace.unwrap();
        let errors: Vec<f64> = trace.entries.iter().map(|e| e.error_inf.unwrap()).collect();
        for k in 0..errors.len() - 1 {
            let excess = errors[k + 1] - mdp.gamma() * errors[k];
            worst_excess = worst_excess.max(excess);
            assert!(
                excess <= 1e-9,
                "ACCEPTANCE C4 VI gamma-contraction: FAIL — step {k} exceeds bound by {excess:.3e}"
            );
        }
        let kappas = kappa_sequence(mdp, &trace, BStrategy::Identity).unwrap();
        for kappa in kappas {
            assert!(
                (kappa - mdp.gamma()).abs() <= 1e-12,
                "ACCEPTANCE C4: FAIL — identity kappa {kappa} != gamma {}",
                mdp.gamma()
            );
        }
    }
    println!("ACCEPTANCE C4 VI gamma-contraction: PASS (worst slack {worst_excess:.3e} <= 1e-9)");
}

#[test]
fn criterion_05_pi_terminal_exactness() {
    let mut worst: f64 = 0.0;
    for mdp in &tiny_instances() {
        let (v_star, _) = brute_force_optimal(mdp).unwrap();
        let run = policy_iteration(mdp, &greedy_zero(mdp), &traced(1e-10)).unwrap();
        let trace = run.trace.unwrap();

        // greedy policies selected by PI, in order: pi_0 = greedy(theta0),
        // then the improvement recorded with each evaluated cost
        let mut selected = vec![greedy_zero(mdp)];
        selected.extend(trace.entries.iter().map(|e| e.policy.clone().unwrap()));

        let first_optimal = selected
            .iter()
            .position(|pi| is_optimal(mdp, pi, &v_star))
            .expect("policy iteration must reach an optimal policy");
        // the iterate evaluated right after selecting that policy
        let collapse = if first_optimal < trace.len() {
            trace.entries[first_optimal].theta.as_ref().unwrap()
        } else {
            &run.theta
        };
        let err = collapse.inf_distance(&v_star);
        worst = worst.max(err);
        assert!(
            err <= 1e-9,
            "ACCEPTANCE C5 PI terminal exactness: FAIL — post-optimal iterate off by {err:.3e}"
        );
    }
    println!(
        "ACCEPTANCE C5 PI terminal exactness: PASS (worst collapse error {worst:.3e} <= 1e-9)"
    );
}

#[test]
fn criterion_06_t_alpha_global_contraction() {
    let gamma = 0.4;
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let instances: Vec<Mdp> = tiny_instances()
        .into_iter()
        .filter(|m| m.gamma() == gamma)
        .collect();
    assert!(
        instances.len() >= 40,
        "suite should be roughly half gamma = 0.4"
    );
    let mut worst_excess: f64 = f64::NEG_INFINITY;
    for mdp in &instances {
        for &alpha in &[0.75f64, 0.9, 1.1] {
            let beta = (alpha - 1.0).abs() / alpha + gamma / alpha;
            for _ in 0..1000 {
                let a: Vec<f64> = (0..mdp.n())
                    .map(|_| (rng.random::<f64>() - 0.5) * 8.0)
                    .collect();
                let b: Vec<f64> = (0..mdp.n())
                    .map(|_| (rng.random::<f64>() - 0.5) * 8.0)
                    .collect();
                let (a, b) = (CostVector::new(a), CostVector::new(b));
                let ta = apply_t_alpha(mdp, alpha, &a).unwrap();
                let tb = apply_t_alpha(mdp, alpha, &b).unwrap();
                let excess = ta.inf_distance(&tb) - beta * a.inf_distance(&b);
                worst_excess = worst_excess.max(excess);
                assert!(
                    excess <= 1e-12,
                    "ACCEPTANCE C6 T_alpha contraction: FAIL — alpha={alpha}, excess {excess:.3e}"
                );
            }
        }
    }
    println!("ACCEPTANCE C6 T_alpha contraction: PASS (worst slack {worst_excess:.3e} <= 1e-12)");
}

#[test]
fn criterion_07_alpha_vi_asymptotic_acceleration() {
    let mdp = benchmark_scale_instance(42);
    let zero = CostVector::zeros(500);

    // high-accuracy reference from policy iteration
    let reference = policy_iteration(
        &mdp,
        &greedy_zero(&mdp),
        &SolverConfig::for_policy_iteration().with_tol(1e-12),
    )
    .unwrap();
    assert!(reference.converged());
    let v_star = reference.theta;

    let config = traced(1e-10).with_reference(v_star.clone());
    let vi = value_iteration(&mdp, &zero, &config).unwrap();
    let avi = alpha_value_iteration(&mdp, 0.8, &zero, &config, false).unwrap();
    assert!(vi.converged() && avi.converged());

    let vi_rate = empirical_rate(&vi.trace.unwrap(), &v_star, 0.5).unwrap();
    let avi_rate = empirical_rate(&avi.trace.unwrap(), &v_star, 0.5).unwrap();

    assert!(
        avi_rate <= 0.30,
        "ACCEPTANCE C7 alpha-VI acceleration: FAIL — alpha=0.8 tail rate {avi_rate:.4} > 0.30"
    );
    assert!(
        avi_rate < vi_rate,
        "ACCEPTANCE C7 alpha-VI acceleration: FAIL — alpha rate {avi_rate:.4} not below VI {vi_rate:.4}"
    );
    assert!(
        (0.35..=0.4001).contains(&vi_rate),
        "ACCEPTANCE C7 alpha-VI acceleration: FAIL — VI tail rate {vi_rate:.4} outside [0.35, 0.4001]"
    );
    println!(
        "ACCEPTANCE C7 alpha-VI acceleration: PASS (alpha=0.8 rate {avi_rate:.4} <= 0.30, VI rate {vi_rate:.4})"
    );
}

#[test]
fn criterion_08_alpha_sweep_shape() {
    let mdp = benchmark_scale_instance(42);
    let zero = CostVector::zeros(500);
    let config = SolverConfig::default()
        .with_tol(1e-10)
        .with_max_iters(20_000);

    // 15-step grid over [0.5, 1.2]; decimal stepping keeps alpha = 1 exact
    let grid: Vec<f64> = (0..15).map(|i| (50 + 5 * i) as f64 / 100.0).collect();
    assert_eq!(grid[10], 1.0);

    let mut converged_counts: Vec<(f64, usize)> = Vec::new();
    for &alpha in &grid {
        let run = alpha_value_iteration(&mdp, alpha, &zero, &config, true).unwrap();
        if run.converged() {
            converged_counts.push((alpha, run.iterations));
        }
    }

    // alpha = 1 must reproduce plain value iteration exactly
    let vi = value_iteration(&mdp, &zero, &config).unwrap();
    let at_one = converged_counts
        .iter()
        .find(|(a, _)| *a == 1.0)
        .expect("alpha = 1 run must converge");
    assert_eq!(
        at_one.1, vi.iterations,
        "ACCEPTANCE C8 sweep shape: FAIL — alpha=1 iteration count differs from VI"
    );

    let (best_alpha, best_iters) = *converged_counts
        .iter()
        .min_by_key(|(_, iters)| *iters)
        .unwrap();
    let summary: Vec<String> = converged_counts
        .iter()
        .map(|(a, i)| format!("{a}:{i}"))
        .collect();
    println!(
        "ACCEPTANCE C8 sweep shape: iteration counts {{{}}}",
        summary.join(", ")
    );
    assert!(
        (0.5..=0.75).contains(&best_alpha),
        "ACCEPTANCE C8 sweep shape: FAIL — iteration-count minimum at alpha={best_alpha} \
         ({best_iters} iterations), outside [0.5, 0.75]"
    );
    println!("ACCEPTANCE C8 sweep shape: PASS (minimum at alpha={best_alpha}, alpha=1 matches VI)");
}

#[test]
fn criterion_09_shift_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mdp = random_mdp(6, 3, if seed % 2 == 0 { 0.4 } else { 0.9 }, 500 + seed).unwrap();
        let gamma = mdp.gamma();
        for &alpha in &[0.8f64, 1.0, 1.5] {
            for _ in 0..20 {
                let theta =
                    CostVector::new((0..6).map(|_| (rng.random::<f64>() - 0.5) * 4.0).collect());
                let b = (rng.random::<f64>() - 0.5) * 4.0;
                let k = 1 + (rng.random::<u64>() % 10) as usize;
                let factor = (alpha - 1.0 + gamma) / alpha;

                let mut plain = theta.clone();
                let mut shifted = CostVector::new(theta.values().iter().map(|v| v + b).collect());
                for _ in 0..k {
                    plain = apply_t_alpha(&mdp, alpha, &plain).unwrap();
                    shifted = apply_t_alpha(&mdp, alpha, &shifted).unwrap();
                }
                let shift = factor.powi(k as i32) * b;
                for s in 0..6 {
                    let gap = (shifted[s] - plain[s] - shift).abs();
                    worst = worst.max(gap);
                    assert!(
                        gap <= 1e-9,
                        "ACCEPTANCE C9 shift invariance: FAIL — alpha={alpha}, k={k}, gap {gap:.3e}"
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE C9 shift invariance: PASS (worst gap {worst:.3e} <= 1e-9)");
}

#[test]
fn criterion_10_t_alpha_monotone_for_alpha_ge_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(888);
    for seed in 0..10u64 {
        let mdp = random_mdp(5, 3, if seed % 2 == 0 { 0.4 } else { 0.9 }, 600 + seed).unwrap();
        for &alpha in &[1.0f64, 1.2, 2.0] {
            for _ in 0..100 {
                let lo: Vec<f64> = (0..5).map(|_| (rng.random::<f64>() - 0.5) * 6.0).collect();
                let hi: Vec<f64> = lo.iter().map(|v| v + rng.random::<f64>() * 3.0).collect();
                let t_lo = apply_t_alpha(&mdp, alpha, &CostVector::new(lo)).unwrap();
                let t_hi = apply_t_alpha(&mdp, alpha, &CostVector::new(hi)).unwrap();
                for s in 0..5 {
                    assert!(
                        t_lo[s] <= t_hi[s],
                        "ACCEPTANCE C10 monotonicity: FAIL — alpha={alpha}, state {s}"
                    );
                }
            }
        }
    }
    println!("ACCEPTANCE C10 monotonicity: PASS (componentwise order preserved)");
}

#[test]
fn criterion_11_pi_iteration_count_at_scale() {
    let mut max_iters = 0usize;
    for seed in 100..110u64 {
        let mdp = benchmark_scale_instance(seed);
        let run = policy_iteration(
            &mdp,
            &greedy_zero(&mdp),
            &SolverConfig::for_policy_iteration().with_tol(1e-10),
        )
        .unwrap();
        assert!(run.converged());
        max_iters = max_iters.max(run.iterations);
        assert!(
            run.iterations <= 20,
            "ACCEPTANCE C11 PI iteration count: FAIL — seed {seed} needed {} iterations",
            run.iterations
        );
    }
    println!("ACCEPTANCE C11 PI iteration count: PASS (max {max_iters} <= 20 over 10 instances)");
}
