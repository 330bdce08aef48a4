use proptest::prelude::*;

use super::*;
use crate::planner::SymbolicTransition;

fn st(i: usize) -> SymbolicState {
    SymbolicState::from_values(vec![i])
}

fn sub(from: usize, action: usize, to: usize) -> Subtask {
    Subtask { id: SymbolicTransition { from: st(from), action, to: st(to) } }
}

fn rates(alpha: f64, beta: f64) -> MetaConfig {
    MetaConfig { alpha, beta, ..MetaConfig::default() }
}

#[test]
fn extrinsic_reward_cases() {
    let c = MetaConfig::default();
    assert_eq!(extrinsic_reward(0.5, 7.0, &c), -100.0);
    assert_eq!(extrinsic_reward(0.95, -10.0, &c), -10.0);
    assert_eq!(extrinsic_reward(0.9, 3.0, &c), 3.0);
    let constant = MetaConfig { mode: RewardMode::Constant(-10.0), ..c };
    assert_eq!(extrinsic_reward(1.0, 42.0, &constant), -10.0);
    assert_eq!(extrinsic_reward(0.2, 42.0, &constant), -100.0);
}

#[test]
fn first_update_with_unit_rates() {
    let mut m = MetaTable::new();
    let g = sub(0, 0, 1);
    let inc = r_update(&mut m, &st(0), &g, 5.0, &st(1), &rates(1.0, 1.0));
    assert_eq!(m.r(&st(0), &g), 5.0);
    assert_eq!(m.gain(&st(0), &g), Some(0.0));
    assert_eq!(inc, Increment { r: 5.0, rho: 0.0 });
}

#[test]
fn zero_reward_on_zero_table_is_a_fixed_point() {
    let mut m = MetaTable::new();
    let g = sub(0, 0, 1);
    r_update(&mut m, &st(0), &g, 0.0, &st(1), &rates(0.5, 0.5));
    assert_eq!(m.r(&st(0), &g), 0.0);
    assert_eq!(m.gain(&st(0), &g), Some(0.0));
}

#[test]
fn zero_rates_leave_values() {
    let mut m = MetaTable::new();
    let g = sub(0, 0, 1);
    m.set_r(&st(0), &g, 2.0);
    m.set_gain(&st(0), &g, -3.0);
    let inc = r_update(&mut m, &st(0), &g, 99.0, &st(1), &rates(0.0, 0.0));
    assert_eq!(m.r(&st(0), &g), 2.0);
    assert_eq!(m.gain(&st(0), &g), Some(-3.0));
    assert_eq!(inc.magnitude(), 0.0);
}

#[test]
fn gain_target_reads_updated_r() {
    // R(s0,g) moves from 0 to 4 first, so max R(s0,.) = 4 in the gain target.
    let mut m = MetaTable::new();
    let g = sub(0, 0, 1);
    let h = sub(1, 0, 0);
    m.set_r(&st(1), &h, 1.0);
    r_update(&mut m, &st(0), &g, 3.0, &st(1), &rates(1.0, 1.0));
    assert_eq!(m.r(&st(0), &g), 4.0);
    assert_eq!(m.gain(&st(0), &g), Some(3.0 + 1.0 - 4.0));
}

#[test]
fn current_state_bootstrap_is_selectable() {
    let mut m = MetaTable::new();
    let g = sub(0, 0, 1);
    let other = sub(0, 1, 2);
    m.set_r(&st(0), &other, 6.0);
    let c = MetaConfig { bootstrap: BootstrapState::Current, ..rates(1.0, 1.0) };
    r_update(&mut m, &st(0), &g, 1.0, &st(1), &c);
    assert_eq!(m.r(&st(0), &g), 7.0);
}

#[test]
fn convergence_check() {
    let tol = 1e-6;
    assert!(converged(&[Increment { r: 0.0, rho: 0.0 }; 3], tol));
    assert!(!converged(&[Increment { r: 0.0, rho: 0.0 }, Increment { r: 2.0 * tol, rho: 0.0 }], tol));
    assert!(!converged(&[], tol));
}

proptest! {
    #[test]
    fn update_touches_one_entry(
        seeds in prop::collection::vec((0usize..4, 0usize..3, -5.0f64..5.0, -5.0f64..5.0), 1..12),
        s in 0usize..4, a in 0usize..3, r_e in -10.0f64..10.0, alpha in 0.0f64..=1.0, beta in 0.0f64..=1.0,
    ) {
        let mut m = MetaTable::new();
        for &(x, b, r, rho) in &seeds {
            let g = sub(x, b, (x + 1) % 4);
            m.set_r(&st(x), &g, r);
            m.set_gain(&st(x), &g, rho);
        }
        let before = m.clone();
        let g = sub(s, a, (s + 1) % 4);
        r_update(&mut m, &st(s), &g, r_e, &st((s + 1) % 4), &rates(alpha, beta));
        for x in 0..4 {
            for b in 0..3 {
                let h = sub(x, b, (x + 1) % 4);
                if h == g {
                    continue;
                }
                prop_assert_eq!(m.r(&st(x), &h).to_bits(), before.r(&st(x), &h).to_bits());
                prop_assert_eq!(m.gain(&st(x), &h).map(f64::to_bits), before.gain(&st(x), &h).map(f64::to_bits));
            }
        }
    }

    #[test]
    fn crossing_the_threshold_never_lowers_reward(below in 0.0f64..0.9, above in 0.9f64..=1.0, psi in 1.0f64..200.0, ret in -200.0f64..200.0) {
        let c = MetaConfig { psi, ..MetaConfig::default() };
        prop_assume!(ret >= -psi);
        prop_assert!(extrinsic_reward(above, ret, &c) >= extrinsic_reward(below, ret, &c));
    }
}
