//! Labelled-graph domains with exact per-edge rewards.
//!
//! Nodes become the values of a single `node` fluent and edge labels become
//! actions. The concrete environment mirrors the graph: primitive action `k`
//! follows the edge labelled `k` and pays its reward, so every subtask is
//! learnable in one step.

use std::fmt::Write as _;

use rand::Rng;

use crate::action_lang::{parse_action_description, ActionDescription, SymbolicState};
use crate::subtask::GroundingOracle;

use super::{Model, ModelEnv, StepOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub label: usize,
    pub to: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub nodes: usize,
    pub labels: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("a synthetic domain needs at least one node and one label")]
    Empty,
    #[error("edge {0} refers to a node or label outside the graph")]
    OutOfRange(usize),
    #[error("edge {0} duplicates a label at its source node")]
    DuplicateLabel(usize),
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("edge {0} repeats a source/target pair under another label")]
    ParallelEdge(usize),
    #[error("edge {0} has a non-finite reward")]
    BadReward(usize),
}

pub fn node_name(i: usize) -> String {
    format!("n{i}")
}

pub fn label_name(k: usize) -> String {
    format!("a{k}")
}

impl SyntheticSpec {
    pub fn check(&self) -> Result<(), SpecError> {
        if self.nodes == 0 || self.labels == 0 {
            return Err(SpecError::Empty);
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.from >= self.nodes || e.to >= self.nodes || e.label >= self.labels {
                return Err(SpecError::OutOfRange(i));
            }
            if !e.reward.is_finite() {
                return Err(SpecError::BadReward(i));
            }
            if e.from == e.to {
                return Err(SpecError::SelfLoop(i));
            }
            for f in &self.edges[..i] {
                if f.from == e.from && f.label == e.label {
                    return Err(SpecError::DuplicateLabel(i));
                }
                if f.from == e.from && f.to == e.to {
                    return Err(SpecError::ParallelEdge(i));
                }
            }
        }
        Ok(())
    }

    pub fn edge(&self, from: usize, label: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.label == label)
    }

    /// Source text of the symbolic domain.
    pub fn to_source(&self) -> String {
        let nodes: Vec<String> = (0..self.nodes).map(node_name).collect();
        let mut out = format!("sort nodes = {{{}}}\nfluent node : nodes\n", nodes.join(", "));
        for k in 0..self.labels {
            let _ = writeln!(out, "action {}", label_name(k));
        }
        for from in 0..self.nodes {
            for k in 0..self.labels {
                match self.edge(from, k) {
                    Some(e) => {
                        let _ = writeln!(out, "dynamic {} causes node={} if node={}", label_name(k), node_name(e.to), node_name(from));
                    }
                    None => {
                        let _ = writeln!(out, "nonexecutable {} if node={}", label_name(k), node_name(from));
                    }
                }
            }
        }
        out.push_str("inertial node\n");
        out
    }

    /// Random spec with integer rewards in `rewards`, each (node, label)
    /// pair getting an edge with probability `density`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        max_nodes: usize,
        max_labels: usize,
        density: f64,
        rewards: std::ops::RangeInclusive<i32>,
    ) -> SyntheticSpec {
        let nodes = rng.gen_range(2..=max_nodes.max(2));
        let labels = rng.gen_range(1..=max_labels.max(1));
        let mut edges = Vec::new();
        for from in 0..nodes {
            let mut used = Vec::new();
            for label in 0..labels {
                if !rng.gen_bool(density) {
                    continue;
                }
                let targets: Vec<usize> = (0..nodes).filter(|t| *t != from && !used.contains(t)).collect();
                if targets.is_empty() {
                    break;
                }
                let to = targets[rng.gen_range(0..targets.len())];
                used.push(to);
                edges.push(Edge { from, label, to, reward: f64::from(rng.gen_range(rewards.clone())) });
            }
        }
        SyntheticSpec { nodes, labels, edges }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModel {
    pub spec: SyntheticSpec,
}

impl Model for SyntheticModel {
    type State = usize;

    fn num_actions(&self) -> usize {
        self.spec.labels
    }

    /// Unlabelled moves stay put at zero reward.
    fn transition(&self, s: &usize, action: usize) -> (usize, StepOutcome) {
        match self.spec.edge(*s, action) {
            Some(e) => (e.to, StepOutcome { reward: e.reward, done: false }),
            None => (*s, StepOutcome { reward: 0.0, done: false }),
        }
    }

    fn states(&self) -> Option<Vec<usize>> {
        Some((0..self.spec.nodes).collect())
    }
}

pub type SyntheticEnv = ModelEnv<SyntheticModel>;

/// `node=ni` holds exactly in concrete node `i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NodeGrounding;

impl GroundingOracle<usize> for NodeGrounding {
    fn holds(&self, symbolic: &SymbolicState, s: &usize) -> bool {
        symbolic.get(0) == *s
    }
}

pub fn make_synthetic(spec: &SyntheticSpec) -> Result<(ActionDescription, SyntheticEnv), SpecError> {
    spec.check()?;
    let d = parse_action_description(&spec.to_source()).expect("generated source parses");
    Ok((d, ModelEnv::new(SyntheticModel { spec: spec.clone() }, 0)))
}

/// Symbolic state for node `i`.
pub fn node_state(i: usize) -> SymbolicState {
    SymbolicState::from_values(vec![i])
}

/// Ground-truth r_e per (state, action), read off the graph.
pub fn reward_table(spec: &SyntheticSpec) -> impl Fn(&SymbolicState, usize) -> f64 + '_ {
    move |s, a| spec.edge(s.get(0), a).map_or(0.0, |e| e.reward)
}
