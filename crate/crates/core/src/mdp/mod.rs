//! MDP data model: validation, canonical and random instance construction,
//! policy enumeration and file serialization.

mod format;

use std::collections::BTreeMap;
use std::ops::Index;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{dot, Matrix};

pub use format::{from_str as load_mdp, to_string as save_mdp};

/// Absolute tolerance on transition row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Rows whose sum is within this slop of 1 are kept bit-for-bit on load;
/// rows between this and [`ROW_SUM_TOL`] get renormalized. The slop covers
/// the worst-case accumulation error of summing a freshly normalized row,
/// so save/load round-trips leave healthy instances untouched.
pub(crate) const ROW_SUM_PRESERVE: f64 = 1000.0 * f64::EPSILON;

/// Default cap on the number of policies [`enumerate_policies`] will yield.
pub const DEFAULT_POLICY_CAP: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("n must be at least 1")]
    ZeroStates,
    #[error("m must be at least 1")]
    ZeroActions,
    #[error("gamma must lie strictly inside (0,1), got {0}")]
    GammaOutOfRange(f64),
    #[error("malformed instance: {detail}")]
    Shape { detail: String },
    #[error("instance violates model invariants:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("policy has length {found}, expected {expected}")]
    PolicyLength { expected: usize, found: usize },
    #[error("policy selects non-admissible action {action} in state {state}")]
    PolicyNotAdmissible { state: usize, action: usize },
    #[error("instance has {count} policies, exceeding the enumeration cap {cap}")]
    PolicyCapExceeded { count: u128, cap: u64 },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| format!("  - {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// A violated model invariant, with its location. Violations are data,
/// not errors: [`validate`] collects them all instead of failing fast.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    ProbOutOfRange {
        state: usize,
        action: usize,
        successor: usize,
        p: f64,
    },
    NonFiniteCost {
        state: usize,
        action: usize,
        value: f64,
    },
    EmptyActionSet {
        state: usize,
    },
    GammaRange {
        gamma: f64,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state},{action}) sums to {sum}")
            }
            Violation::ProbOutOfRange {
                state,
                action,
                successor,
                p,
            } => {
                write!(
                    f,
                    "probability ({state},{action}) -> {successor} is {p}, outside [0,1]"
                )
            }
            Violation::NonFiniteCost {
                state,
                action,
                value,
            } => {
                write!(f, "cost ({state},{action}) is not finite ({value})")
            }
            Violation::EmptyActionSet { state } => {
                write!(f, "state {state} has no admissible actions")
            }
            Violation::GammaRange { gamma } => write!(f, "gamma not in (0,1): {gamma}"),
        }
    }
}

/// One transition row p(. | s, a), stored dense or column-compressed.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionRow {
    /// Probabilities for every successor state, length n.
    Dense(Vec<f64>),
    /// Sorted successor indices with their probabilities.
    Sparse { cols: Vec<usize>, probs: Vec<f64> },
}

impl TransitionRow {
    pub fn dot(&self, theta: &[f64]) -> f64 {
        match self {
            TransitionRow::Dense(p) => dot(p, theta),
            TransitionRow::Sparse { cols, probs } => {
                let mut acc = 0.0;
                for (&c, &p) in cols.iter().zip(probs) {
                    acc += p * theta[c];
                }
                acc
            }
        }
    }

    pub fn sum(&self) -> f64 {
        match self {
            TransitionRow::Dense(p) => p.iter().sum(),
            TransitionRow::Sparse { probs, .. } => probs.iter().sum(),
        }
    }

    pub fn entries(&self) -> Vec<(usize, f64)> {
        match self {
            TransitionRow::Dense(p) => p.iter().copied().enumerate().collect(),
            TransitionRow::Sparse { cols, probs } => {
                cols.iter().copied().zip(probs.iter().copied()).collect()
            }
        }
    }

    pub fn write_dense(&self, out: &mut [f64]) {
        out.fill(0.0);
        match self {
            TransitionRow::Dense(p) => out.copy_from_slice(p),
            TransitionRow::Sparse { cols, probs } => {
                for (&c, &p) in cols.iter().zip(probs) {
                    out[c] = p;
                }
            }
        }
    }

    fn scale(&mut self, factor: f64) {
        match self {
            TransitionRow::Dense(p) => p.iter_mut().for_each(|x| *x *= factor),
            TransitionRow::Sparse { probs, .. } => probs.iter_mut().for_each(|x| *x *= factor),
        }
    }
}

/// Finite discounted MDP: n states, m global action labels, per-state
/// admissible subsets, row-stochastic transitions and finite stage costs.
///
/// Entries are stored compactly per admissible (state, action) pair; states
/// index `0..n`, actions `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    n: usize,
    m: usize,
    gamma: f64,
    allowed: Vec<Vec<usize>>,
    /// offsets[s]..offsets[s+1] spans the entries of state s
    offsets: Vec<usize>,
    costs: Vec<f64>,
    rows: Vec<TransitionRow>,
}

impl Mdp {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Admissible actions of state `s`, sorted ascending.
    pub fn allowed(&self, s: usize) -> &[usize] {
        &self.allowed[s]
    }

    pub fn all_actions_allowed(&self) -> bool {
        self.allowed.iter().all(|a| a.len() == self.m)
    }

    fn entry_index(&self, s: usize, a: usize) -> Option<usize> {
        let local = self.allowed[s].binary_search(&a).ok()?;
        Some(self.offsets[s] + local)
    }

    pub fn is_allowed(&self, s: usize, a: usize) -> bool {
        self.entry_index(s, a).is_some()
    }

    /// Stage cost g(s, a). Panics if `a` is not admissible in `s`.
    pub fn cost(&self, s: usize, a: usize) -> f64 {
        let idx = self
            .entry_index(s, a)
            .unwrap_or_else(|| panic!("action {a} not admissible in state {s}"));
        self.costs[idx]
    }

    /// Transition row p(. | s, a). Panics if `a` is not admissible in `s`.
    pub fn row(&self, s: usize, a: usize) -> &TransitionRow {
        let idx = self
            .entry_index(s, a)
            .unwrap_or_else(|| panic!("action {a} not admissible in state {s}"));
        &self.rows[idx]
    }

    /// Iterate (action, cost, row) over the admissible actions of `s`,
    /// in ascending action order.
    pub fn actions_of(&self, s: usize) -> impl Iterator<Item = (usize, f64, &TransitionRow)> {
        let base = self.offsets[s];
        self.allowed[s]
            .iter()
            .enumerate()
            .map(move |(i, &a)| (a, self.costs[base + i], &self.rows[base + i]))
    }

    /// Checks that `pi` maps every state to one of its admissible actions.
    pub fn check_policy(&self, pi: &Policy) -> Result<(), MdpError> {
        if pi.len() != self.n {
            return Err(MdpError::PolicyLength {
                expected: self.n,
                found: pi.len(),
            });
        }
        for (s, &a) in pi.actions().iter().enumerate() {
            if !self.is_allowed(s, a) {
                return Err(MdpError::PolicyNotAdmissible {
                    state: s,
                    action: a,
                });
            }
        }
        Ok(())
    }

    pub fn builder(n: usize, m: usize, gamma: f64) -> MdpBuilder {
        MdpBuilder::new(n, m, gamma)
    }
}

/// Deterministic stationary policy: one admissible action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    actions: Vec<usize>,
}

impl Policy {
    pub fn new(actions: Vec<usize>) -> Self {
        Policy { actions }
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Real vector over states; holds cost iterates and value functions.
/// Entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector {
    values: Vec<f64>,
}

impl CostVector {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite()),
            "cost vector entries must be finite"
        );
        CostVector { values }
    }

    pub fn zeros(n: usize) -> Self {
        CostVector {
            values: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn inf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Infinity-norm distance to `other`.
    pub fn inf_distance(&self, other: &CostVector) -> f64 {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for CostVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl From<Vec<f64>> for CostVector {
    fn from(values: Vec<f64>) -> Self {
        CostVector::new(values)
    }
}

/// Dynamics induced by a fixed policy: row-stochastic P^pi and cost g^pi.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedDynamics {
    pub p_pi: Matrix,
    pub g_pi: Vec<f64>,
}

/// Incremental construction of [`Mdp`] instances.
///
/// `build` validates the assembled instance; `assemble` skips semantic
/// validation so that deliberately broken instances can be fed to
/// [`validate`] (and so the loader can report every violation at once).
pub struct MdpBuilder {
    n: usize,
    m: usize,
    gamma: f64,
    allowed: Vec<Option<Vec<usize>>>,
    costs: BTreeMap<(usize, usize), f64>,
    rows: BTreeMap<(usize, usize), TransitionRow>,
    shape_errors: Vec<String>,
}

impl MdpBuilder {
    pub fn new(n: usize, m: usize, gamma: f64) -> Self {
        MdpBuilder {
            n,
            m,
            gamma,
            allowed: vec![None; n],
            costs: BTreeMap::new(),
            rows: BTreeMap::new(),
            shape_errors: Vec::new(),
        }
    }

    pub fn cost(mut self, s: usize, a: usize, value: f64) -> Self {
        if s >= self.n || a >= self.m {
            self.shape_errors
                .push(format!("cost entry ({s},{a}) out of range"));
            return self;
        }
        if self.costs.insert((s, a), value).is_some() {
            self.shape_errors
                .push(format!("duplicate cost entry ({s},{a})"));
        }
        self
    }

    pub fn dense_row(mut self, s: usize, a: usize, probs: Vec<f64>) -> Self {
        if s >= self.n || a >= self.m {
            self.shape_errors
                .push(format!("transition entry ({s},{a}) out of range"));
            return self;
        }
        if probs.len() != self.n {
            self.shape_errors.push(format!(
                "dense row ({s},{a}) has length {}, expected {}",
                probs.len(),
                self.n
            ));
            return self;
        }
        if self
            .rows
            .insert((s, a), TransitionRow::Dense(probs))
            .is_some()
        {
            self.shape_errors
                .push(format!("duplicate transition entry ({s},{a})"));
        }
        self
    }

    pub fn sparse_row(mut self, s: usize, a: usize, entries: Vec<(usize, f64)>) -> Self {
        if s >= self.n || a >= self.m {
            self.shape_errors
                .push(format!("transition entry ({s},{a}) out of range"));
            return self;
        }
        let mut entries = entries;
        entries.sort_by_key(|&(c, _)| c);
        let mut cols = Vec::with_capacity(entries.len());
        let mut probs = Vec::with_capacity(entries.len());
        for (c, p) in entries {
            if c >= self.n {
                self.shape_errors
                    .push(format!("row ({s},{a}) references successor {c} >= n"));
                return self;
            }
            if cols.last() == Some(&c) {
                self.shape_errors
                    .push(format!("row ({s},{a}) lists successor {c} twice"));
                return self;
            }
            cols.push(c);
            probs.push(p);
        }
        // a row naming every successor in order is dense in disguise
        let row = if cols.len() == self.n && cols.iter().enumerate().all(|(i, &c)| i == c) {
            TransitionRow::Dense(probs)
        } else {
            TransitionRow::Sparse { cols, probs }
        };
        if self.rows.insert((s, a), row).is_some() {
            self.shape_errors
                .push(format!("duplicate transition entry ({s},{a})"));
        }
        self
    }

    /// Restrict the admissible actions of state `s`. Without a call, all
    /// `m` actions are admissible.
    pub fn allowed(mut self, s: usize, mut actions: Vec<usize>) -> Self {
        if s >= self.n {
            self.shape_errors
                .push(format!("allowed entry for state {s} out of range"));
            return self;
        }
        actions.sort_unstable();
        let before = actions.len();
        actions.dedup();
        if actions.len() != before {
            self.shape_errors
                .push(format!("allowed set of state {s} lists an action twice"));
        }
        if let Some(&a) = actions.iter().find(|&&a| a >= self.m) {
            self.shape_errors.push(format!(
                "allowed set of state {s} references action {a} >= m"
            ));
            return self;
        }
        self.allowed[s] = Some(actions);
        self
    }

    /// Assemble without semantic validation. Missing costs become NaN and
    /// missing rows become empty (both get flagged by [`validate`]).
    pub fn assemble(mut self) -> Result<Mdp, MdpError> {
        if self.n == 0 {
            return Err(MdpError::ZeroStates);
        }
        if self.m == 0 {
            return Err(MdpError::ZeroActions);
        }
        let allowed: Vec<Vec<usize>> = self
            .allowed
            .iter()
            .map(|o| o.clone().unwrap_or_else(|| (0..self.m).collect()))
            .collect();
        // entries for non-admissible pairs are data bugs, not violations
        for &(s, a) in self.costs.keys().chain(self.rows.keys()) {
            if allowed[s].binary_search(&a).is_err() {
                self.shape_errors
                    .push(format!("entry ({s},{a}) refers to a non-admissible action"));
            }
        }
        if !self.shape_errors.is_empty() {
            return Err(MdpError::Shape {
                detail: self.shape_errors.join("; "),
            });
        }

        let mut offsets = Vec::with_capacity(self.n + 1);
        let mut costs = Vec::new();
        let mut rows = Vec::new();
        offsets.push(0);
        for (s, acts) in allowed.iter().enumerate() {
            for &a in acts {
                costs.push(self.costs.get(&(s, a)).copied().unwrap_or(f64::NAN));
                rows.push(
                    self.rows
                        .get(&(s, a))
                        .cloned()
                        .unwrap_or(TransitionRow::Sparse {
                            cols: vec![],
                            probs: vec![],
                        }),
                );
            }
            offsets.push(costs.len());
        }
        Ok(Mdp {
            n: self.n,
            m: self.m,
            gamma: self.gamma,
            allowed,
            offsets,
            costs,
            rows,
        })
    }

    /// Assemble and validate; any violation fails the build.
    pub fn build(self) -> Result<Mdp, MdpError> {
        let mdp = self.assemble()?;
        let violations = validate(&mdp);
        if violations.is_empty() {
            Ok(mdp)
        } else {
            Err(MdpError::Invalid(violations))
        }
    }
}

/// Collects every violated model invariant with its location.
/// An empty result means the instance is valid.
pub fn validate(mdp: &Mdp) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(mdp.gamma > 0.0 && mdp.gamma < 1.0) {
        out.push(Violation::GammaRange { gamma: mdp.gamma });
    }
    for s in 0..mdp.n {
        if mdp.allowed[s].is_empty() {
            out.push(Violation::EmptyActionSet { state: s });
        }
        for (a, cost, row) in mdp.actions_of(s) {
            if !cost.is_finite() {
                out.push(Violation::NonFiniteCost {
                    state: s,
                    action: a,
                    value: cost,
                });
            }
            for (sp, p) in row.entries() {
                if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                    out.push(Violation::ProbOutOfRange {
                        state: s,
                        action: a,
                        successor: sp,
                        p,
                    });
                }
            }
            let sum = row.sum();
            // NaN sums must be flagged too, so negate the within-band test
            let within_band = (sum - 1.0).abs() <= ROW_SUM_TOL;
            if !within_band {
                out.push(Violation::RowSum {
                    state: s,
                    action: a,
                    sum,
                });
            }
        }
    }
    out
}

/// P^pi and g^pi for a fixed policy: row s of P^pi is the transition row of
/// (s, pi(s)) and g^pi(s) = g(s, pi(s)).
pub fn induced_dynamics(mdp: &Mdp, pi: &Policy) -> Result<InducedDynamics, MdpError> {
    mdp.check_policy(pi)?;
    let n = mdp.n();
    let mut p_pi = Matrix::zeros(n, n);
    let mut g_pi = Vec::with_capacity(n);
    for s in 0..n {
        let a = pi.action(s);
        mdp.row(s, a).write_dense(p_pi.row_mut(s));
        g_pi.push(mdp.cost(s, a));
    }
    Ok(InducedDynamics { p_pi, g_pi })
}

/// Random dense instance: every action admissible everywhere, each transition
/// row is n uniform [0,1) draws divided by their sum, costs uniform [0,1).
///
/// The generator is ChaCha8 seeded with `seed_from_u64(seed)`; draws happen
/// per (s, a) pair in row-major order, transition row first, then the cost.
/// Identical arguments reproduce the identical instance bit for bit on every
/// platform.
pub fn random_mdp(n: usize, m: usize, gamma: f64, seed: u64) -> Result<Mdp, MdpError> {
    if n == 0 {
        return Err(MdpError::ZeroStates);
    }
    if m == 0 {
        return Err(MdpError::ZeroActions);
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(MdpError::GammaOutOfRange(gamma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut costs = Vec::with_capacity(n * m);
    let mut rows = Vec::with_capacity(n * m);
    for _s in 0..n {
        for _a in 0..m {
            let mut row: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            rows.push(TransitionRow::Dense(row));
            costs.push(rng.random::<f64>());
        }
    }
    let allowed: Vec<Vec<usize>> = (0..n).map(|_| (0..m).collect()).collect();
    let offsets: Vec<usize> = (0..=n).map(|s| s * m).collect();
    Ok(Mdp {
        n,
        m,
        gamma,
        allowed,
        offsets,
        costs,
        rows,
    })
}

/// Number of deterministic stationary policies, saturating at u128::MAX.
pub fn policy_count(mdp: &Mdp) -> u128 {
    mdp.allowed
        .iter()
        .fold(1u128, |acc, acts| acc.saturating_mul(acts.len() as u128))
}

/// Policy with the given lexicographic rank (state 0 most significant).
pub(crate) fn decode_policy(mdp: &Mdp, index: u64) -> Policy {
    let mut actions = vec![0usize; mdp.n()];
    let mut rem = index;
    for s in (0..mdp.n()).rev() {
        let acts = mdp.allowed(s);
        let radix = acts.len() as u64;
        actions[s] = acts[(rem % radix) as usize];
        rem /= radix;
    }
    Policy::new(actions)
}

/// Iterator over all policies in lexicographic order of action vectors.
#[derive(Debug)]
pub struct PolicyIter<'a> {
    mdp: &'a Mdp,
    next: u64,
    count: u64,
}

impl Iterator for PolicyIter<'_> {
    type Item = Policy;

    fn next(&mut self) -> Option<Policy> {
        if self.next >= self.count {
            return None;
        }
        let pi = decode_policy(self.mdp, self.next);
        self.next += 1;
        Some(pi)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rem = (self.count - self.next) as usize;
        (rem, Some(rem))
    }
}

impl ExactSizeIterator for PolicyIter<'_> {}

/// Enumerate all policies with the default cap of [`DEFAULT_POLICY_CAP`].
pub fn enumerate_policies(mdp: &Mdp) -> Result<PolicyIter<'_>, MdpError> {
    enumerate_policies_capped(mdp, DEFAULT_POLICY_CAP)
}

pub fn enumerate_policies_capped(mdp: &Mdp, cap: u64) -> Result<PolicyIter<'_>, MdpError> {
    let count = policy_count(mdp);
    if count > cap as u128 {
        return Err(MdpError::PolicyCapExceeded { count, cap });
    }
    Ok(PolicyIter {
        mdp,
        next: 0,
        count: count as u64,
    })
}
