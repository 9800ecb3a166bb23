//! Textual MDP file format (JSON).
//!
//! Top level: `n`, `m`, `gamma`, `costs` (array of `{s, a, value}`),
//! `transitions` (array of `{s, a, rows: [{sp, p}, ...]}`), optional
//! `allowed` (one array of action indices per state; absent means all `m`
//! actions are admissible everywhere). Indices are 0-based; floats are
//! decimal with full round-trip precision.
//!
//! Loading validates the instance: transition rows whose sum drifted from 1
//! by more than a machine-level slop but at most [`super::ROW_SUM_TOL`] are
//! renormalized; larger drifts are rejected. Healthy rows are preserved bit
//! for bit, so `load(save(mdp)) == mdp` for valid instances.

use serde::{Deserialize, Serialize};

use super::{Mdp, MdpBuilder, MdpError, ROW_SUM_PRESERVE, ROW_SUM_TOL};

#[derive(Serialize, Deserialize)]
struct Document {
    n: usize,
    m: usize,
    gamma: f64,
    costs: Vec<CostEntry>,
    transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allowed: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct CostEntry {
    s: usize,
    a: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct TransitionEntry {
    s: usize,
    a: usize,
    rows: Vec<ProbEntry>,
}

#[derive(Serialize, Deserialize)]
struct ProbEntry {
    sp: usize,
    p: f64,
}

/// Parse an MDP document. The returned instance has been validated.
pub fn from_str(document: &str) -> Result<Mdp, MdpError> {
    let doc: Document = serde_json::from_str(document)?;
    let mut builder = MdpBuilder::new(doc.n, doc.m, doc.gamma);
    if let Some(allowed) = doc.allowed {
        if allowed.len() != doc.n {
            return Err(MdpError::Shape {
                detail: format!(
                    "allowed has {} entries, expected n = {}",
                    allowed.len(),
                    doc.n
                ),
            });
        }
        for (s, actions) in allowed.into_iter().enumerate() {
            builder = builder.allowed(s, actions);
        }
    }
    for c in doc.costs {
        builder = builder.cost(c.s, c.a, c.value);
    }
    for t in doc.transitions {
        let entries: Vec<(usize, f64)> = t.rows.into_iter().map(|e| (e.sp, e.p)).collect();
        builder = builder.sparse_row(t.s, t.a, entries);
    }
    let mut mdp = builder.assemble()?;
    renormalize_rows(&mut mdp);
    let violations = super::validate(&mdp);
    if violations.is_empty() {
        Ok(mdp)
    } else {
        Err(MdpError::Invalid(violations))
    }
}

/// Serialize an MDP document. Entries are emitted in (s, a) order, so the
/// output is deterministic.
pub fn to_string(mdp: &Mdp) -> String {
    let mut costs = Vec::new();
    let mut transitions = Vec::new();
    for s in 0..mdp.n() {
        for (a, cost, row) in mdp.actions_of(s) {
            costs.push(CostEntry { s, a, value: cost });
            let rows = row
                .entries()
                .into_iter()
                .map(|(sp, p)| ProbEntry { sp, p })
                .collect();
            transitions.push(TransitionEntry { s, a, rows });
        }
    }
    let allowed = if mdp.all_actions_allowed() {
        None
    } else {
        Some((0..mdp.n()).map(|s| mdp.allowed(s).to_vec()).collect())
    };
    let doc = Document {
        n: mdp.n(),
        m: mdp.m(),
        gamma: mdp.gamma(),
        costs,
        transitions,
        allowed,
    };
    serde_json::to_string_pretty(&doc).expect("document serialization cannot fail")
}

/// Text formats can shave ulps off row sums; restore stochasticity for rows
/// inside the acceptance band while leaving machine-exact rows untouched.
fn renormalize_rows(mdp: &mut Mdp) {
    for row in &mut mdp.rows {
        let sum = row.sum();
        let drift = (sum - 1.0).abs();
        if drift > ROW_SUM_PRESERVE && drift <= ROW_SUM_TOL {
            row.scale(1.0 / sum);
        }
    }
}
