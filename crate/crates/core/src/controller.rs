//! Tabular Q-learning controllers, one table per subtask.

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;

use rand::Rng;

use crate::envs::Environment;
use crate::subtask::{GroundedOption, GroundingOracle, Subtask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: u64,
}

impl EpsilonSchedule {
    /// Linear from `start` to `end` over `decay_steps`, then flat.
    pub fn at(&self, step: u64) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        self.start + (self.end - self.start) * (step as f64 / self.decay_steps as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub alpha_c: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub max_steps: usize,
    pub phi: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            alpha_c: 1.0,
            gamma: 0.99,
            epsilon: EpsilonSchedule { start: 1.0, end: 0.05, decay_steps: 10_000 },
            max_steps: 50,
            phi: 100.0,
        }
    }
}

impl ControllerConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.alpha_c > 0.0 && self.alpha_c <= 1.0) {
            return Err(format!("alpha_c must lie in (0,1], got {}", self.alpha_c));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(format!("gamma must lie in [0,1), got {}", self.gamma));
        }
        let e = self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) {
            return Err("epsilon bounds must lie in [0,1]".into());
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

/// `phi` on termination, otherwise the environment reward.
pub fn intrinsic_reward(env_reward: f64, terminated: bool, cfg: &ControllerConfig) -> f64 {
    if terminated {
        cfg.phi
    } else {
        env_reward
    }
}

#[derive(Debug, Clone, Default)]
struct SubtaskTable<S> {
    values: HashMap<S, Vec<f64>>,
    steps: u64,
}

/// Q(g, s, a), zero until written, plus per-subtask step counters that
/// drive the exploration schedule.
#[derive(Debug, Clone)]
pub struct QTable<S> {
    num_actions: usize,
    tables: HashMap<Subtask, SubtaskTable<S>>,
}

impl<S: Clone + Eq + Hash> QTable<S> {
    pub fn new(num_actions: usize) -> Self {
        QTable { num_actions, tables: HashMap::new() }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, g: &Subtask, s: &S, a: usize) -> f64 {
        self.tables.get(g).and_then(|t| t.values.get(s)).map_or(0.0, |v| v[a])
    }

    pub fn row(&self, g: &Subtask, s: &S) -> Vec<f64> {
        self.tables
            .get(g)
            .and_then(|t| t.values.get(s))
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.num_actions])
    }

    pub fn max(&self, g: &Subtask, s: &S) -> f64 {
        self.row(g, s).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every action whose value equals the row maximum.
    pub fn greedy_actions(&self, g: &Subtask, s: &S) -> Vec<usize> {
        let row = self.row(g, s);
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (0..row.len()).filter(|&a| row[a] == m).collect()
    }

    pub fn steps(&self, g: &Subtask) -> u64 {
        self.tables.get(g).map_or(0, |t| t.steps)
    }

    pub fn entries(&self, g: &Subtask) -> usize {
        self.tables.get(g).map_or(0, |t| t.values.len())
    }

    pub fn subtasks(&self) -> impl Iterator<Item = &Subtask> {
        self.tables.keys()
    }

    fn table(&mut self, g: &Subtask) -> &mut SubtaskTable<S> {
        if !self.tables.contains_key(g) {
            self.tables.insert(g.clone(), SubtaskTable { values: HashMap::new(), steps: 0 });
        }
        self.tables.get_mut(g).expect("just inserted")
    }
}

/// One tabular step toward `r_i + γ max_a' Q(g, s', a')`; the bootstrap is
/// exactly zero on terminal steps and `s'` is not read.
#[allow(clippy::too_many_arguments)]
pub fn q_update<S: Clone + Eq + Hash>(
    q: &mut QTable<S>,
    g: &Subtask,
    s: &S,
    a: usize,
    r_i: f64,
    s_next: &S,
    terminal: bool,
    cfg: &ControllerConfig,
) {
    let bootstrap = if terminal { 0.0 } else { cfg.gamma * q.max(g, s_next) };
    let n = q.num_actions;
    let row = q.table(g).values.entry(s.clone()).or_insert_with(|| vec![0.0; n]);
    row[a] = (1.0 - cfg.alpha_c) * row[a] + cfg.alpha_c * (r_i + bootstrap);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt {
    pub success: bool,
    pub env_return: f64,
}

/// Outcomes of the most recent attempts per subtask.
#[derive(Debug, Clone)]
pub struct SuccessTracker {
    window: usize,
    attempts: HashMap<Subtask, VecDeque<Attempt>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no data: subtask has no recorded attempts")]
pub struct NoData;

impl Default for SuccessTracker {
    fn default() -> Self {
        Self::new(100)
    }
}

impl SuccessTracker {
    pub fn new(window: usize) -> Self {
        assert!(window > 0);
        SuccessTracker { window, attempts: HashMap::new() }
    }

    pub fn record(&mut self, g: &Subtask, success: bool, env_return: f64) {
        let w = self.attempts.entry(g.clone()).or_default();
        if w.len() == self.window {
            w.pop_front();
        }
        w.push_back(Attempt { success, env_return });
    }

    pub fn attempts(&self, g: &Subtask) -> usize {
        self.attempts.get(g).map_or(0, VecDeque::len)
    }

    pub fn window_full(&self, g: &Subtask) -> bool {
        self.attempts(g) == self.window
    }

    /// Fraction of successes in the window, or over all attempts so far
    /// while the window is still filling.
    pub fn success_ratio(&self, g: &Subtask) -> Result<f64, NoData> {
        let w = self.attempts.get(g).filter(|w| !w.is_empty()).ok_or(NoData)?;
        Ok(w.iter().filter(|a| a.success).count() as f64 / w.len() as f64)
    }

    /// Mean environment return over the successful attempts in the window.
    pub fn mean_success_return(&self, g: &Subtask) -> Option<f64> {
        let w = self.attempts.get(g)?;
        let (sum, n) = w.iter().filter(|a| a.success).fold((0.0, 0usize), |(s, n), a| (s + a.env_return, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ControllerError {
    #[error("initiation unsatisfied: the subtask cannot start in the current environment state")]
    InitiationUnsatisfied,
}

#[derive(Debug, Clone)]
pub struct Step<S> {
    pub state: S,
    pub action: usize,
    pub intrinsic_reward: f64,
    pub next: S,
}

#[derive(Debug, Clone)]
pub struct SubtaskOutcome<S> {
    pub trace: Vec<Step<S>>,
    pub success: bool,
    pub env_reward_sum: f64,
    /// The environment signalled the end of the episode.
    pub episode_done: bool,
}

/// Uniform choice among the maximizers of the row.
pub fn greedy_action<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let best: Vec<usize> = (0..row.len()).filter(|&a| row[a] == m).collect();
    if best.len() == 1 {
        best[0]
    } else {
        best[rng.gen_range(0..best.len())]
    }
}

/// Runs the option's sub-policy until it terminates, times out, or the
/// episode ends, learning from every step.
pub fn execute_subtask<E, O, R>(
    g: &GroundedOption<'_, O>,
    env: &mut E,
    q: &mut QTable<E::State>,
    cfg: &ControllerConfig,
    rng: &mut R,
) -> Result<SubtaskOutcome<E::State>, ControllerError>
where
    E: Environment,
    O: GroundingOracle<E::State> + ?Sized,
    R: Rng + ?Sized,
{
    if !g.initiation(env.state()) {
        return Err(ControllerError::InitiationUnsatisfied);
    }
    let mut out = SubtaskOutcome { trace: Vec::new(), success: false, env_reward_sum: 0.0, episode_done: false };
    if g.termination(env.state()) {
        out.success = true;
        return Ok(out);
    }
    let key = &g.subtask;
    for _ in 0..cfg.max_steps {
        let s = env.state().clone();
        let eps = cfg.epsilon.at(q.steps(key));
        let a = if rng.gen::<f64>() < eps {
            rng.gen_range(0..env.num_actions())
        } else {
            greedy_action(&q.row(key, &s), rng)
        };
        let step = env.step(a);
        let next = env.state().clone();
        let done = g.termination(&next);
        let r_i = intrinsic_reward(step.reward, done, cfg);
        q_update(q, key, &s, a, r_i, &next, done || step.done, cfg);
        q.table(key).steps += 1;
        out.env_reward_sum += step.reward;
        out.trace.push(Step { state: s, action: a, intrinsic_reward: r_i, next });
        out.episode_done = step.done;
        if done {
            out.success = true;
            break;
        }
        if step.done {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
