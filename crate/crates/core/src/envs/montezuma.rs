//! First room of Montezuma's Revenge as a planning-only fixture.

use crate::action_lang::{parse_action_description, ActionDescription, SymbolicState};
use crate::planner::{successors, RhoTable, SymbolicTransition, TransitionGraph};

pub const MONTEZUMA_DESCRIPTION: &str = include_str!("../../../../fixtures/montezuma.bc");

pub fn montezuma_description() -> ActionDescription {
    parse_action_description(MONTEZUMA_DESCRIPTION).expect("bundled montezuma description parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyCondition {
    Without,
    With,
    Either,
}

/// One row of the room's subtask table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubtaskRow {
    pub number: usize,
    pub from: &'static str,
    pub to: &'static str,
    pub key: KeyCondition,
    /// Game reward collected on completion.
    pub reward: f64,
    /// Whether a controller learns the row's option.
    pub learnable: bool,
}

const fn row(number: usize, from: &'static str, to: &'static str, key: KeyCondition, reward: f64, learnable: bool) -> SubtaskRow {
    SubtaskRow { number, from, to, key, reward, learnable }
}

pub const SUBTASKS: [SubtaskRow; 13] = [
    row(1, "mp", "lrl", KeyCondition::Without, 0.0, true),
    row(2, "lrl", "lll", KeyCondition::Without, 0.0, true),
    row(3, "lll", "key", KeyCondition::Without, 100.0, true),
    row(4, "key", "lll", KeyCondition::With, 0.0, true),
    row(5, "lll", "lrl", KeyCondition::Either, 0.0, true),
    row(6, "lrl", "mp", KeyCondition::Either, 0.0, true),
    row(7, "mp", "rd", KeyCondition::With, 300.0, true),
    row(8, "lrl", "ls", KeyCondition::Either, 0.0, false),
    row(9, "ls", "key", KeyCondition::Either, 100.0, false),
    row(10, "mp", "rd", KeyCondition::Without, 0.0, false),
    row(11, "lrl", "key", KeyCondition::Either, 100.0, false),
    row(12, "key", "lrl", KeyCondition::With, 0.0, false),
    row(13, "lrl", "rd", KeyCondition::With, 300.0, false),
];

pub fn state(d: &ActionDescription, loc: &str, key: bool) -> SymbolicState {
    d.parse_state(&format!("loc={loc},picked_key={key}")).expect("valid fixture state")
}

pub fn initial_state(d: &ActionDescription) -> SymbolicState {
    state(d, "mp", false)
}

/// Executable transitions realizing a row, one per admissible key status.
pub fn row_transitions(d: &ActionDescription, r: &SubtaskRow) -> Vec<SymbolicTransition> {
    let keys: &[bool] = match r.key {
        KeyCondition::Without => &[false],
        KeyCondition::With => &[true],
        KeyCondition::Either => &[false, true],
    };
    let action = d.action_index(&format!("move({})", r.to)).expect("fixture action");
    let mut out = Vec::new();
    for &k in keys {
        let from = state(d, r.from, k);
        let next = successors(&from, d).expect("fixture successors");
        if let Some((_, to)) = next.into_iter().find(|(a, _)| *a == action) {
            out.push(SymbolicTransition { from, action, to });
        }
    }
    out
}

/// Row number of a transition, if it realizes one.
pub fn row_of(d: &ActionDescription, t: &SymbolicTransition) -> Option<usize> {
    SUBTASKS.iter().find(|r| row_transitions(d, r).contains(t)).map(|r| r.number)
}

/// Gains as a converged meta-controller would report them: a learnable
/// row earns its game reward; unlearnable rows and transitions with no
/// grounded option earn `-psi`.
pub fn fixture_facts(d: &ActionDescription, psi: f64, inf_default: f64) -> RhoTable {
    let mut rho = RhoTable::new(inf_default);
    let mut graph = TransitionGraph::new();
    let start = graph.intern(&initial_state(d));
    for i in graph.reachable(start, d).expect("fixture successors") {
        let from = graph.state(i).clone();
        for (a, j) in graph.successors(i, d).expect("fixture successors").to_vec() {
            let t = SymbolicTransition { from: from.clone(), action: a, to: graph.state(j).clone() };
            let value = match row_of(d, &t).map(|n| &SUBTASKS[n - 1]) {
                Some(r) if r.learnable => r.reward,
                _ => -psi,
            };
            rho.set(from.clone(), a, value);
        }
    }
    rho
}
