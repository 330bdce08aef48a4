//! Environments: deterministic models wrapped as stateful episodes.

pub mod montezuma;
pub mod synthetic;
pub mod taxi;

use std::fmt::Debug;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
}

/// An episodic environment driven one primitive action at a time.
pub trait Environment {
    type State: Clone + Eq + Hash + Debug;
    fn num_actions(&self) -> usize;
    fn reset(&mut self);
    fn state(&self) -> &Self::State;
    fn step(&mut self, action: usize) -> StepOutcome;
}

/// A deterministic transition function, optionally with an enumerable
/// state space.
pub trait Model {
    type State: Clone + Eq + Hash + Ord + Debug;
    fn num_actions(&self) -> usize;
    fn transition(&self, s: &Self::State, action: usize) -> (Self::State, StepOutcome);
    /// Every state, or `None` when the space is not enumerable.
    fn states(&self) -> Option<Vec<Self::State>>;
}

/// Runs a [`Model`] from a fixed initial state.
#[derive(Debug, Clone)]
pub struct ModelEnv<M: Model> {
    pub model: M,
    initial: M::State,
    current: M::State,
}

impl<M: Model> ModelEnv<M> {
    pub fn new(model: M, initial: M::State) -> Self {
        ModelEnv { model, current: initial.clone(), initial }
    }

    pub fn set_state(&mut self, s: M::State) {
        self.current = s;
    }

    pub fn initial(&self) -> &M::State {
        &self.initial
    }
}

impl<M: Model> Environment for ModelEnv<M> {
    type State = M::State;

    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn reset(&mut self) {
        self.current = self.initial.clone();
    }

    fn state(&self) -> &M::State {
        &self.current
    }

    fn step(&mut self, action: usize) -> StepOutcome {
        let (next, out) = self.model.transition(&self.current, action);
        self.current = next;
        out
    }
}
