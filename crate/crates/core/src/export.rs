//! Plain-data exports: trajectories as CSV or JSON, and network topology
//! snapshots as DOT or JSON.
//!
//! Everything here renders to strings; writing files is the caller's
//! business. Output is deterministic: identical inputs produce identical
//! bytes, nodes appear in index order, and edges in row-major order of the
//! cross-holdings matrix.

use crate::dynamics::Trajectory;
use crate::model::{failure_indicator, EquityState, FinancialNetwork};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExportError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("trajectory has {states} states but {indicators} indicators")]
    InconsistentTrajectory { states: usize, indicators: usize },
    #[error("state has length {got}, expected {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("names list has length {got}, expected {expected}")]
    NameLength { got: usize, expected: usize },
    #[error("serialization failed: {0}")]
    Serialization(String),
}

/// Renders a trajectory as CSV with header `t,V_1,...,V_n,phi_1,...,phi_n`.
/// Equity values print with 12 significant digits, which is enough to
/// replay the run step by step well inside any simulation tolerance.
pub fn trajectory_csv(traj: &Trajectory) -> Result<String, ExportError> {
    let first = traj.states.first().ok_or(ExportError::EmptyTrajectory)?;
    if traj.states.len() != traj.indicators.len() {
        return Err(ExportError::InconsistentTrajectory {
            states: traj.states.len(),
            indicators: traj.indicators.len(),
        });
    }
    let n = first.v.len();
    let mut out = String::new();
    out.push('t');
    for i in 1..=n {
        write!(out, ",V_{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",phi_{i}").unwrap();
    }
    out.push('\n');
    for (state, indicator) in traj.states.iter().zip(&traj.indicators) {
        write!(out, "{}", state.t).unwrap();
        for v in &state.v {
            write!(out, ",{v:.11e}").unwrap();
        }
        for phi in &indicator.phi {
            write!(out, ",{phi}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Renders a trajectory as JSON. The document is the full trajectory
/// structure (states, indicators, convergence verdict), so parsing it back
/// reproduces the in-memory value exactly.
pub fn trajectory_json(traj: &Trajectory) -> Result<String, ExportError> {
    if traj.states.is_empty() {
        return Err(ExportError::EmptyTrajectory);
    }
    serde_json::to_string_pretty(traj).map_err(|e| ExportError::Serialization(e.to_string()))
}

/// One node of a topology snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: String,
    pub value: f64,
    pub failed: bool,
}

/// One directed cross-holding: `from` owns a share of `to`'s equity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSnapshot {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// The network topology at one time step: per-node equity and failure
/// status plus every nonzero cross-holding edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySnapshot {
    pub t: usize,
    pub nodes: Vec<NodeSnapshot>,
    pub edges: Vec<EdgeSnapshot>,
}

/// Captures the topology at the time of `state`. Node failure status is
/// recomputed from the state against the network thresholds, and edges
/// enumerate exactly the nonzero entries of the cross-holdings matrix in
/// row-major order.
pub fn topology_snapshot(
    network: &FinancialNetwork,
    state: &EquityState,
    names: &[String],
) -> Result<TopologySnapshot, ExportError> {
    let n = network.n();
    if state.v.len() != n {
        return Err(ExportError::StateLength {
            got: state.v.len(),
            expected: n,
        });
    }
    if names.len() != n {
        return Err(ExportError::NameLength {
            got: names.len(),
            expected: n,
        });
    }
    let indicator = failure_indicator(&state.v, network.v_threshold())
        .map_err(|e| ExportError::Serialization(e.to_string()))?;
    let nodes = (0..n)
        .map(|i| NodeSnapshot {
            id: names[i].clone(),
            value: state.v[i],
            failed: indicator.phi[i] == 1,
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let weight = network.c().get(i, j);
            if weight != 0.0 {
                edges.push(EdgeSnapshot {
                    from: names[i].clone(),
                    to: names[j].clone(),
                    weight,
                });
            }
        }
    }
    Ok(TopologySnapshot {
        t: state.t,
        nodes,
        edges,
    })
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a snapshot in DOT: a digraph whose nodes carry `label`,
/// `class` (healthy or failed), and `value` attributes, with one weighted
/// edge per cross-holding. Output order follows the snapshot, so identical
/// snapshots render to identical bytes.
pub fn topology_dot(snapshot: &TopologySnapshot) -> String {
    let mut out = String::new();
    writeln!(out, "digraph cross_holdings {{").unwrap();
    writeln!(out, "  label=\"t = {}\";", snapshot.t).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for node in &snapshot.nodes {
        let class = if node.failed { "failed" } else { "healthy" };
        writeln!(
            out,
            "  {} [label={}, class=\"{class}\", value=\"{}\"];",
            dot_quote(&node.id),
            dot_quote(&node.id),
            node.value
        )
        .unwrap();
    }
    for edge in &snapshot.edges {
        writeln!(
            out,
            "  {} -> {} [weight=\"{}\"];",
            dot_quote(&edge.from),
            dot_quote(&edge.to),
            edge.weight
        )
        .unwrap();
    }
    writeln!(out, "}}").unwrap();
    out
}

/// Renders a snapshot as JSON.
pub fn topology_json(snapshot: &TopologySnapshot) -> Result<String, ExportError> {
    serde_json::to_string_pretty(snapshot).map_err(|e| ExportError::Serialization(e.to_string()))
}
