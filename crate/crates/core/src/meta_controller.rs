//! Extrinsic rewards and R-learning over (symbolic state, subtask) pairs.

use std::collections::HashMap;

use crate::action_lang::SymbolicState;
use crate::subtask::Subtask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardMode {
    /// Mean environment return of recent successful executions.
    EnvReturn,
    /// A fixed reward for every competent subtask.
    Constant(f64),
}

/// Which state's best R value the R target bootstraps from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapState {
    /// `max R(s', ·)`: standard R-learning, stable.
    Next,
    /// `max R(s, ·)`: diverges for the default rates; kept for comparison.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetaConfig {
    pub alpha: f64,
    pub beta: f64,
    pub psi: f64,
    pub threshold: f64,
    pub mode: RewardMode,
    pub bootstrap: BootstrapState,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            alpha: 0.1,
            beta: 0.05,
            psi: 100.0,
            threshold: 0.9,
            mode: RewardMode::EnvReturn,
            bootstrap: BootstrapState::Next,
        }
    }
}

impl MetaConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) || !(self.beta >= 0.0 && self.beta <= 1.0) {
            return Err("alpha and beta must lie in [0,1]".into());
        }
        if self.psi <= 0.0 {
            return Err(format!("psi must be positive, got {}", self.psi));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(format!("threshold must lie in (0,1], got {}", self.threshold));
        }
        Ok(())
    }
}

/// `-psi` below the competence threshold, otherwise the subtask's return.
pub fn extrinsic_reward(ratio: f64, env_return: f64, cfg: &MetaConfig) -> f64 {
    if ratio < cfg.threshold {
        -cfg.psi
    } else {
        match cfg.mode {
            RewardMode::EnvReturn => env_return,
            RewardMode::Constant(c) => c,
        }
    }
}

/// Relative values R(s, g) and gains ρ^g(s).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetaTable {
    r: HashMap<SymbolicState, HashMap<Subtask, f64>>,
    gain: HashMap<SymbolicState, HashMap<Subtask, f64>>,
}

/// Signed changes applied by one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub r: f64,
    pub rho: f64,
}

impl Increment {
    pub fn magnitude(&self) -> f64 {
        self.r.abs().max(self.rho.abs())
    }
}

impl MetaTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn r(&self, s: &SymbolicState, g: &Subtask) -> f64 {
        self.r.get(s).and_then(|m| m.get(g)).copied().unwrap_or(0.0)
    }

    pub fn gain(&self, s: &SymbolicState, g: &Subtask) -> Option<f64> {
        self.gain.get(s).and_then(|m| m.get(g)).copied()
    }

    pub fn set_r(&mut self, s: &SymbolicState, g: &Subtask, v: f64) {
        self.r.entry(s.clone()).or_default().insert(g.clone(), v);
    }

    pub fn set_gain(&mut self, s: &SymbolicState, g: &Subtask, v: f64) {
        self.gain.entry(s.clone()).or_default().insert(g.clone(), v);
    }

    /// Makes the options available at `s` part of `max R(s, ·)`, at zero
    /// when not yet valued.
    pub fn register<'a>(&mut self, s: &SymbolicState, options: impl IntoIterator<Item = &'a Subtask>) {
        let row = self.r.entry(s.clone()).or_default();
        for g in options {
            row.entry(g.clone()).or_insert(0.0);
        }
    }

    /// `max_g R(s, g)` over the known options at `s`; zero when there are none.
    pub fn max_r(&self, s: &SymbolicState) -> f64 {
        match self.r.get(s) {
            Some(row) if !row.is_empty() => row.values().copied().fold(f64::NEG_INFINITY, f64::max),
            _ => 0.0,
        }
    }

    pub fn gain_entries(&self) -> usize {
        self.gain.values().map(HashMap::len).sum()
    }
}

/// One R-learning step. R moves first; the gain target then reads the
/// updated R values. An absent gain starts at zero.
pub fn r_update(
    m: &mut MetaTable,
    s: &SymbolicState,
    g: &Subtask,
    r_e: f64,
    s_next: &SymbolicState,
    cfg: &MetaConfig,
) -> Increment {
    let rho = m.gain(s, g).unwrap_or(0.0);
    let old_r = m.r(s, g);
    let bootstrap = match cfg.bootstrap {
        BootstrapState::Next => m.max_r(s_next),
        BootstrapState::Current => m.max_r(s),
    };
    let new_r = (1.0 - cfg.alpha) * old_r + cfg.alpha * (r_e - rho + bootstrap);
    m.set_r(s, g, new_r);
    let target = r_e + m.max_r(s_next) - m.max_r(s);
    let new_rho = (1.0 - cfg.beta) * rho + cfg.beta * target;
    m.set_gain(s, g, new_rho);
    Increment { r: new_r - old_r, rho: new_rho - rho }
}

/// True iff there is a recorded sweep and every increment in it is below `tol`.
pub fn converged(increments: &[Increment], tol: f64) -> bool {
    assert!(tol > 0.0, "tolerance must be positive");
    !increments.is_empty() && increments.iter().all(|i| i.magnitude() < tol)
}

#[cfg(test)]
mod tests;
