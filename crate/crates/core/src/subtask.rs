//! Options induced from symbolic transitions.

use std::fmt::Write as _;

use crate::action_lang::{ActionDescription, SymbolicState};
use crate::planner::SymbolicTransition;

/// Decides whether a symbolic state's atoms hold in a concrete state.
pub trait GroundingOracle<S> {
    fn holds(&self, symbolic: &SymbolicState, env_state: &S) -> bool;
}

impl<S, F: Fn(&SymbolicState, &S) -> bool> GroundingOracle<S> for F {
    fn holds(&self, symbolic: &SymbolicState, env_state: &S) -> bool {
        self(symbolic, env_state)
    }
}

/// A subtask is identified by the transition it realizes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subtask {
    pub id: SymbolicTransition,
}

/// A subtask bound to a grounding oracle. Initiation is `F(from, ·)` and
/// termination is the indicator `F(to, ·)`.
pub struct GroundedOption<'o, O: ?Sized> {
    pub subtask: Subtask,
    oracle: &'o O,
}

impl<O: ?Sized> GroundedOption<'_, O> {
    pub fn initiation<S>(&self, s: &S) -> bool
    where
        O: GroundingOracle<S>,
    {
        self.oracle.holds(&self.subtask.id.from, s)
    }

    pub fn termination<S>(&self, s: &S) -> bool
    where
        O: GroundingOracle<S>,
    {
        self.oracle.holds(&self.subtask.id.to, s)
    }
}

pub fn induce_option<'o, O: ?Sized>(t: &SymbolicTransition, f: &'o O) -> GroundedOption<'o, O> {
    GroundedOption { subtask: Subtask { id: t.clone() }, oracle: f }
}

/// `from-atoms|action|to-atoms`; injective because the listings are canonical.
pub fn subtask_key(d: &ActionDescription, g: &Subtask) -> String {
    format!("{}|{}|{}", d.format_state(&g.id.from), d.action_name(g.id.action), d.format_state(&g.id.to))
}

/// Table of subtasks with learning status, one row per subtask.
#[derive(Debug, Clone)]
pub struct SubtaskRow {
    pub subtask: Subtask,
    pub learned: bool,
    pub in_final_plan: bool,
}

pub fn listing_report(d: &ActionDescription, rows: &[SubtaskRow]) -> String {
    let mut out = String::from("subtask\tfrom\taction\tto\tlearned\tin_final_plan\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            d.format_state(&r.subtask.id.from),
            d.action_name(r.subtask.id.action),
            d.format_state(&r.subtask.id.to),
            if r.learned { "yes" } else { "no" },
            if r.in_final_plan { "yes" } else { "no" },
        );
    }
    out
}
