use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::action_lang::SymbolicState;
use crate::envs::{Model, ModelEnv, StepOutcome};
use crate::oracle::{value_iteration_policy, SubtaskMdp};
use crate::planner::SymbolicTransition;
use crate::subtask::induce_option;

fn subtask(tag: usize) -> Subtask {
    Subtask {
        id: SymbolicTransition {
            from: SymbolicState::from_values(vec![0]),
            action: tag,
            to: SymbolicState::from_values(vec![1]),
        },
    }
}

fn cfg(alpha_c: f64, gamma: f64) -> ControllerConfig {
    ControllerConfig { alpha_c, gamma, ..ControllerConfig::default() }
}

#[test]
fn intrinsic_reward_cases() {
    let c = ControllerConfig { phi: 1.0, ..ControllerConfig::default() };
    assert_eq!(intrinsic_reward(0.0, true, &c), 1.0);
    assert_eq!(intrinsic_reward(0.0, false, &c), 0.0);
    assert_eq!(intrinsic_reward(-1.0, false, &c), -1.0);
}

#[test]
fn terminal_update_from_zero() {
    let g = subtask(0);
    let mut q = QTable::new(2);
    q_update(&mut q, &g, &0u8, 1, 1.0, &1u8, true, &cfg(1.0, 0.99));
    assert_eq!(q.get(&g, &0, 1), 1.0);
    assert_eq!(q.get(&g, &0, 0), 0.0);
}

#[test]
fn zero_step_size_leaves_values() {
    let g = subtask(0);
    let mut q = QTable::new(2);
    q_update(&mut q, &g, &0u8, 0, 3.0, &1u8, true, &cfg(1.0, 0.9));
    q_update(&mut q, &g, &0u8, 0, 50.0, &1u8, false, &cfg(0.0, 0.9));
    assert_eq!(q.get(&g, &0, 0), 3.0);
}

#[test]
fn half_step_with_bootstrap() {
    let g = subtask(0);
    let mut q = QTable::new(2);
    q_update(&mut q, &g, &1u8, 0, 2.0, &9u8, true, &cfg(1.0, 0.9));
    q_update(&mut q, &g, &0u8, 1, 0.0, &1u8, false, &cfg(0.5, 0.9));
    assert!((q.get(&g, &0, 1) - 0.9).abs() < 1e-12);
}

#[test]
fn terminal_update_ignores_next_state() {
    let g = subtask(0);
    let mut q = QTable::new(1);
    q_update(&mut q, &g, &1u8, 0, 1000.0, &2u8, true, &cfg(1.0, 0.9));
    q_update(&mut q, &g, &0u8, 0, 1.0, &1u8, true, &cfg(1.0, 0.9));
    assert_eq!(q.get(&g, &0, 0), 1.0);
}

#[test]
fn ratio_counts() {
    let g = subtask(0);
    let mut t = SuccessTracker::default();
    assert_eq!(t.success_ratio(&g), Err(NoData));
    t.record(&g, true, 1.0);
    t.record(&g, false, 0.0);
    t.record(&g, true, 3.0);
    assert!((t.success_ratio(&g).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(t.mean_success_return(&g), Some(2.0));

    let mut full = SuccessTracker::default();
    for _ in 0..100 {
        full.record(&g, true, 0.0);
    }
    assert_eq!(full.success_ratio(&g), Ok(1.0));
    let mut mixed = SuccessTracker::default();
    for i in 0..100 {
        mixed.record(&g, i % 10 != 0, 0.0);
    }
    assert_eq!(mixed.success_ratio(&g), Ok(0.9));
}

#[test]
fn epsilon_decays_linearly_then_holds() {
    let e = EpsilonSchedule { start: 1.0, end: 0.05, decay_steps: 10_000 };
    assert_eq!(e.at(0), 1.0);
    assert!((e.at(5_000) - 0.525).abs() < 1e-12);
    assert_eq!(e.at(10_000), 0.05);
    assert_eq!(e.at(1_000_000), 0.05);
}

/// Cells `0..len` in a row; action 0 steps left, action 1 steps right.
#[derive(Debug, Clone)]
struct Corridor {
    len: usize,
}

impl Model for Corridor {
    type State = usize;

    fn num_actions(&self) -> usize {
        2
    }

    fn transition(&self, s: &usize, a: usize) -> (usize, StepOutcome) {
        let next = if a == 0 { s.saturating_sub(1) } else { (s + 1).min(self.len - 1) };
        (next, StepOutcome { reward: -1.0, done: false })
    }

    fn states(&self) -> Option<Vec<usize>> {
        Some((0..self.len).collect())
    }
}

/// `node=0` holds away from the goal cell, `node=1` only on it.
fn corridor_oracle(goal: usize) -> impl Fn(&SymbolicState, &usize) -> bool {
    move |sym: &SymbolicState, s: &usize| (sym.get(0) == 1) == (*s == goal)
}

#[test]
fn immediate_termination_is_success_without_steps() {
    let corridor = Corridor { len: 4 };
    let oracle = |_: &SymbolicState, _: &usize| true;
    let g = SymbolicTransition { from: SymbolicState::from_values(vec![0]), action: 0, to: SymbolicState::from_values(vec![1]) };
    let mut env = ModelEnv::new(corridor, 0);
    let mut q = QTable::new(2);
    let out = execute_subtask(&induce_option(&g, &oracle), &mut env, &mut q, &ControllerConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!(out.success);
    assert!(out.trace.is_empty());
}

#[test]
fn unreachable_goal_times_out() {
    let oracle = corridor_oracle(99);
    let g = subtask(0).id;
    let mut env = ModelEnv::new(Corridor { len: 4 }, 0);
    let mut q = QTable::new(2);
    let c = ControllerConfig { max_steps: 17, ..ControllerConfig::default() };
    let out = execute_subtask(&induce_option(&g, &oracle), &mut env, &mut q, &c, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert!(!out.success);
    assert_eq!(out.trace.len(), 17);
    assert_eq!(out.env_reward_sum, -17.0);
}

#[test]
fn start_outside_initiation_is_an_error() {
    let oracle = corridor_oracle(0);
    let g = subtask(0).id;
    let mut env = ModelEnv::new(Corridor { len: 4 }, 0);
    let mut q = QTable::new(2);
    let r = execute_subtask(&induce_option(&g, &oracle), &mut env, &mut q, &ControllerConfig::default(), &mut ChaCha8Rng::seed_from_u64(3));
    assert!(matches!(r, Err(ControllerError::InitiationUnsatisfied)));
}

#[test]
fn corridor_policy_matches_value_iteration() {
    let corridor = Corridor { len: 8 };
    let goal = 7;
    let oracle = corridor_oracle(goal);
    let g = subtask(0).id;
    let c = ControllerConfig {
        alpha_c: 0.5,
        gamma: 0.9,
        epsilon: EpsilonSchedule { start: 1.0, end: 0.1, decay_steps: 5_000 },
        max_steps: 50,
        phi: 10.0,
    };
    let mut env = ModelEnv::new(corridor.clone(), 0);
    let mut q = QTable::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let key = subtask(0);
    while q.steps(&key) < 10_000 {
        env.set_state(rng.gen_range(0..goal));
        execute_subtask(&induce_option(&g, &oracle), &mut env, &mut q, &c, &mut rng).unwrap();
    }
    let mdp = SubtaskMdp { base: &corridor, terminates: |s: &usize| *s == goal, phi: c.phi };
    let vi = value_iteration_policy(&mdp, c.gamma).unwrap();
    for s in 0..goal {
        assert_eq!(q.greedy_actions(&key, &s), vi.optimal[&s], "cell {s}");
    }
}

proptest! {
    #[test]
    fn q_values_stay_bounded(seed in any::<u64>(), episodes in 1usize..40) {
        let corridor = Corridor { len: 6 };
        let oracle = corridor_oracle(5);
        let g = subtask(0).id;
        let c = ControllerConfig { alpha_c: 0.7, gamma: 0.95, phi: 20.0, max_steps: 30, ..ControllerConfig::default() };
        let bound = (c.phi + 1.0) / (1.0 - c.gamma);
        let mut env = ModelEnv::new(corridor, 0);
        let mut q = QTable::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..episodes {
            env.set_state(rng.gen_range(0..5));
            execute_subtask(&induce_option(&g, &oracle), &mut env, &mut q, &c, &mut rng).unwrap();
        }
        for s in 0..6usize {
            for a in 0..2 {
                prop_assert!(q.get(&subtask(0), &s, a).abs() <= bound);
            }
        }
    }

    #[test]
    fn ratio_ignores_attempts_beyond_the_window(old in prop::collection::vec(any::<bool>(), 0..150), recent in prop::collection::vec(any::<bool>(), 100)) {
        let g = subtask(0);
        let mut with_history = SuccessTracker::default();
        let mut fresh = SuccessTracker::default();
        for &o in &old {
            with_history.record(&g, o, 0.0);
        }
        for &o in &recent {
            with_history.record(&g, o, 1.0);
            fresh.record(&g, o, 1.0);
        }
        prop_assert_eq!(with_history.attempts(&g), 100);
        prop_assert_eq!(with_history.success_ratio(&g), fresh.success_ratio(&g));
        prop_assert_eq!(with_history.mean_success_return(&g), fresh.mean_success_return(&g));
    }
}
