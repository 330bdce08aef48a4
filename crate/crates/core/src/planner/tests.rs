use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::envs::montezuma::{fixture_facts, initial_state, montezuma_description, state};
use crate::envs::synthetic::{make_synthetic, node_state, SyntheticSpec};
use crate::oracle::{brute_force_optimal, enumerate_plans};

const FLOOR: f64 = -1e9;

fn act(d: &ActionDescription, name: &str) -> ActionId {
    d.action_index(name).unwrap()
}

fn step(d: &ActionDescription, s: &SymbolicState, name: &str) -> Option<SymbolicState> {
    let a = act(d, name);
    successors(s, d).unwrap().into_iter().find(|(b, _)| *b == a).map(|(_, t)| t)
}

#[test]
fn move_changes_location_only() {
    let d = montezuma_description();
    let s = state(&d, "mp", false);
    assert_eq!(step(&d, &s, "move(lrl)"), Some(state(&d, "lrl", false)));
}

#[test]
fn reaching_the_key_picks_it_up() {
    let d = montezuma_description();
    let s = state(&d, "lll", false);
    assert_eq!(step(&d, &s, "move(key)"), Some(state(&d, "key", true)));
}

#[test]
fn key_move_blocked_once_holding_key() {
    let d = montezuma_description();
    let s = state(&d, "lll", true);
    assert_eq!(step(&d, &s, "move(key)"), None);
    // Inertia keeps the key after leaving its cell.
    assert_eq!(step(&d, &state(&d, "key", true), "move(lll)"), Some(state(&d, "lll", true)));
}

#[test]
fn conflicting_effects_name_the_action() {
    let src = "fluent f : bool\naction go\ndynamic go causes f=true\ndynamic go causes f=false\ninertial f\n";
    let d = crate::action_lang::parse_action_description(src).unwrap();
    let s = d.parse_state("f=false").unwrap();
    let e = successors(&s, &d).unwrap_err();
    assert_eq!(e, PlanError::InconsistentEffects { action: "go".into(), fluent: "f".into() });
}

#[test]
fn non_inertial_fluents_take_their_default() {
    let src = "fluent lit : bool\nfluent on : bool\naction press\ndynamic press causes lit=true\ndefault lit=false\ninertial on\n";
    let d = crate::action_lang::parse_action_description(src).unwrap();
    let s = d.parse_state("on=true").unwrap();
    let after = step(&d, &s, "press").unwrap();
    assert_eq!(d.format_state(&after), "lit=true,on=true");
    let src2 = src.replace("dynamic press causes lit=true\n", "");
    let d2 = crate::action_lang::parse_action_description(&src2).unwrap();
    let lit = d2.parse_state("lit=false,on=true").unwrap();
    assert_eq!(d2.format_state(&step(&d2, &lit, "press").unwrap()), "lit=false,on=true");
}

#[test]
fn quality_sums_gains() {
    let d = montezuma_description();
    let rho = RhoTable::new(10.0);
    assert_eq!(plan_quality(&Plan::empty(), &rho), 0.0);

    let s0 = state(&d, "mp", false);
    let s1 = state(&d, "lrl", false);
    let s2 = state(&d, "lll", false);
    let s3 = state(&d, "key", true);
    let t = |from: &SymbolicState, a: &str, to: &SymbolicState| SymbolicTransition { from: from.clone(), action: act(&d, a), to: to.clone() };
    let three = Plan { transitions: vec![t(&s0, "move(lrl)", &s1), t(&s1, "move(lll)", &s2), t(&s2, "move(key)", &s3)] };
    assert!(three.is_chained());
    assert_eq!(plan_quality(&three, &rho), 30.0);

    let mut facts = RhoTable::new(10.0);
    facts.set(s0.clone(), act(&d, "move(lrl)"), -100.0);
    facts.set(s1.clone(), act(&d, "move(lll)"), 5.0);
    let two = Plan { transitions: three.transitions[..2].to_vec() };
    assert_eq!(plan_quality(&two, &facts), -95.0);
}

#[test]
fn uniform_gains_fill_the_cap() {
    let d = montezuma_description();
    let rho = RhoTable::new(10.0);
    let p = find_plan(&initial_state(&d), &IntrinsicGoal::new(FLOOR), &d, &rho, 7).unwrap().unwrap();
    assert_eq!(p.len(), 7);
    assert_eq!(plan_quality(&p, &rho), 70.0);
    assert!(p.is_chained());
}

#[test]
fn unreachable_bound_gives_none() {
    let d = montezuma_description();
    let rho = RhoTable::new(10.0);
    assert_eq!(find_plan(&initial_state(&d), &IntrinsicGoal::new(70.0), &d, &rho, 7).unwrap(), None);
}

#[test]
fn table_three_facts_give_subtasks_one_to_seven() {
    let d = montezuma_description();
    let rho = fixture_facts(&d, 100.0, 10.0);
    let p = find_plan(&initial_state(&d), &IntrinsicGoal::new(FLOOR), &d, &rho, 10).unwrap().unwrap();
    let got: Vec<String> = p
        .transitions
        .iter()
        .map(|t| format!("{}>{}", d.format_state(&t.from), d.action_name(t.action)))
        .collect();
    let want = [
        "loc=mp,picked_key=false>move(lrl)",
        "loc=lrl,picked_key=false>move(lll)",
        "loc=lll,picked_key=false>move(key)",
        "loc=key,picked_key=true>move(lll)",
        "loc=lll,picked_key=true>move(lrl)",
        "loc=lrl,picked_key=true>move(mp)",
        "loc=mp,picked_key=true>move(rd)",
    ];
    assert_eq!(got, want);
}

#[test]
fn ties_prefer_short_then_lexicographic() {
    // Two zero-gain routes to the same reward; the shorter wins.
    let spec = SyntheticSpec {
        nodes: 3,
        labels: 2,
        edges: vec![
            crate::envs::synthetic::Edge { from: 0, label: 0, to: 1, reward: 0.0 },
            crate::envs::synthetic::Edge { from: 0, label: 1, to: 2, reward: 0.0 },
            crate::envs::synthetic::Edge { from: 1, label: 1, to: 2, reward: 0.0 },
        ],
    };
    let (d, _) = make_synthetic(&spec).unwrap();
    let mut rho = RhoTable::new(1.0);
    rho.set(node_state(0), 0, 0.0);
    rho.set(node_state(0), 1, 0.0);
    rho.set(node_state(1), 1, 0.0);
    let p = find_plan(&node_state(0), &IntrinsicGoal::new(-1.0), &d, &rho, 3).unwrap().unwrap();
    assert!(p.is_empty());
    let p = find_nonempty_plan(&node_state(0), &IntrinsicGoal::new(-1.0), &d, &rho, 3).unwrap().unwrap();
    assert_eq!(p.action_names(&d), ["a0"]);
}

#[test]
fn nonempty_search_has_nothing_at_dead_ends() {
    let spec = SyntheticSpec { nodes: 2, labels: 1, edges: vec![crate::envs::synthetic::Edge { from: 1, label: 0, to: 0, reward: 1.0 }] };
    let (d, _) = make_synthetic(&spec).unwrap();
    let rho = RhoTable::new(10.0);
    assert_eq!(find_nonempty_plan(&node_state(0), &IntrinsicGoal::new(FLOOR), &d, &rho, 4).unwrap(), None);
    assert_eq!(find_plan(&node_state(0), &IntrinsicGoal::new(FLOOR), &d, &rho, 4).unwrap(), Some(Plan::empty()));
}

#[test]
fn serialization_round_trips() {
    let d = montezuma_description();
    let rho = fixture_facts(&d, 100.0, 10.0);
    let p = find_plan(&initial_state(&d), &IntrinsicGoal::new(FLOOR), &d, &rho, 10).unwrap().unwrap();
    let text = p.serialize(&d, &rho);
    assert!(text.starts_with("# quality 400.000000\n"), "{text}");
    assert_eq!(Plan::deserialize(&text, &d).unwrap(), p);
}

/// Random graph domain plus integer gains on a random subset of edges.
fn random_case(seed: u64) -> (SyntheticSpec, RhoTable, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SyntheticSpec::random(&mut rng, 6, 4, 0.6, -3..=3);
    let mut rho = RhoTable::new(f64::from(rng.gen_range(1..=4)));
    for e in &spec.edges {
        if rng.gen_bool(0.7) {
            rho.set(node_state(e.from), e.label, e.reward);
        }
    }
    (spec, rho, rng.gen_range(1..=5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn successors_are_one_per_action(seed in any::<u64>()) {
        let (spec, _, _) = random_case(seed);
        let (d, _) = make_synthetic(&spec).unwrap();
        for n in 0..spec.nodes {
            let succ = successors(&node_state(n), &d).unwrap();
            let mut acts: Vec<ActionId> = succ.iter().map(|(a, _)| *a).collect();
            acts.dedup();
            prop_assert_eq!(acts.len(), succ.len());
            prop_assert_eq!(succ.clone(), successors(&node_state(n), &d).unwrap());
        }
    }

    #[test]
    fn planner_matches_enumeration(seed in any::<u64>()) {
        let (spec, rho, max_len) = random_case(seed);
        let (d, _) = make_synthetic(&spec).unwrap();
        let i = node_state(0);
        let all = enumerate_plans(&i, &d, max_len).unwrap();
        let score = |s: &SymbolicState, a: ActionId| rho.get(s, a);
        let (want, total) = brute_force_optimal(&all, &d, &score).unwrap();
        let got = find_plan(&i, &IntrinsicGoal::new(FLOOR), &d, &rho, max_len).unwrap().unwrap();
        prop_assert_eq!(plan_quality(&got, &rho), total);
        prop_assert_eq!(&got, &want);

        let nonempty = crate::oracle::PlanSet { plans: all.plans.into_iter().filter(|p| !p.is_empty()).collect() };
        match brute_force_optimal(&nonempty, &d, &score) {
            Some((want, _)) => {
                let got = find_nonempty_plan(&i, &IntrinsicGoal::new(FLOOR), &d, &rho, max_len).unwrap().unwrap();
                prop_assert_eq!(got, want);
            }
            None => prop_assert_eq!(find_nonempty_plan(&i, &IntrinsicGoal::new(FLOOR), &d, &rho, max_len).unwrap(), None),
        }
    }

    #[test]
    fn returned_plans_are_sound(seed in any::<u64>(), threshold in -6i32..12) {
        let (spec, rho, max_len) = random_case(seed);
        let (d, _) = make_synthetic(&spec).unwrap();
        let i = node_state(0);
        if let Some(p) = find_plan(&i, &IntrinsicGoal::new(f64::from(threshold)), &d, &rho, max_len).unwrap() {
            prop_assert!(p.len() <= max_len);
            prop_assert!(p.is_chained());
            prop_assert!(plan_quality(&p, &rho) > f64::from(threshold));
            let mut s = i.clone();
            for t in &p.transitions {
                prop_assert_eq!(&t.from, &s);
                let next = successors(&s, &d).unwrap().into_iter().find(|(a, _)| *a == t.action);
                prop_assert_eq!(next.map(|(_, x)| x), Some(t.to.clone()));
                s = t.to.clone();
            }
        }
    }

    #[test]
    fn goal_ratchet_never_repeats(seed in any::<u64>()) {
        let (spec, rho, max_len) = random_case(seed);
        let (d, _) = make_synthetic(&spec).unwrap();
        let i = node_state(0);
        let mut goal = IntrinsicGoal::new(FLOOR);
        let mut seen: Vec<Plan> = Vec::new();
        while let Some(p) = find_plan(&i, &goal, &d, &rho, max_len).unwrap() {
            let q = plan_quality(&p, &rho);
            prop_assert!(q > goal.threshold);
            prop_assert!(!seen.contains(&p));
            seen.push(p);
            goal = IntrinsicGoal::new(q);
        }
        prop_assert!(seen.len() <= 1, "fixed gains admit one improvement from the floor");
    }
}
