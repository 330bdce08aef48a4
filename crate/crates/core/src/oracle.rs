//! Brute-force ground truth. Nothing here shares search code with the
//! planner or learns anything; it only reuses the successor relation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::hash::Hash;

use crate::action_lang::{ActionDescription, ActionId, SymbolicState};
use crate::envs::taxi::{PassengerLoc, TaxiGrounding, TaxiModel, TaxiParams, TaxiState};
use crate::envs::{Model, StepOutcome};
use crate::planner::{successors, Plan, PlanError, SymbolicTransition, TransitionGraph};
use crate::subtask::GroundingOracle;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlanSet {
    pub plans: Vec<Plan>,
}

/// Every executable plan from `i` of length ≤ `max_len`, the empty plan first.
pub fn enumerate_plans(i: &SymbolicState, d: &ActionDescription, max_len: usize) -> Result<PlanSet, PlanError> {
    fn go(
        s: &SymbolicState,
        d: &ActionDescription,
        left: usize,
        prefix: &mut Vec<SymbolicTransition>,
        out: &mut Vec<Plan>,
    ) -> Result<(), PlanError> {
        out.push(Plan { transitions: prefix.clone() });
        if left == 0 {
            return Ok(());
        }
        for (a, t) in successors(s, d)? {
            prefix.push(SymbolicTransition { from: s.clone(), action: a, to: t.clone() });
            go(&t, d, left - 1, prefix, out)?;
            prefix.pop();
        }
        Ok(())
    }
    let mut plans = Vec::new();
    go(i, d, max_len, &mut Vec::new(), &mut plans)?;
    Ok(PlanSet { plans })
}

pub fn plan_total(p: &Plan, r_e: &dyn Fn(&SymbolicState, ActionId) -> f64) -> f64 {
    p.transitions.iter().map(|t| r_e(&t.from, t.action)).sum()
}

/// Highest Σ r_e; ties go to the shortest plan, then the lexicographically
/// smallest action-name sequence.
pub fn brute_force_optimal(
    ps: &PlanSet,
    d: &ActionDescription,
    r_e: &dyn Fn(&SymbolicState, ActionId) -> f64,
) -> Option<(Plan, f64)> {
    let mut best: Option<(&Plan, f64)> = None;
    for p in &ps.plans {
        let total = plan_total(p, r_e);
        let wins = match best {
            None => true,
            Some((b, bt)) => {
                total > bt
                    || (total == bt
                        && (p.len() < b.len() || (p.len() == b.len() && p.action_names(d) < b.action_names(d))))
            }
        };
        if wins {
            best = Some((p, total));
        }
    }
    best.map(|(p, t)| (p.clone(), t))
}

/// Whether some cycle reachable from `i` has strictly positive Σ r_e.
/// Longest-path relaxation: still improving after |V| rounds means a
/// positive cycle.
pub fn detect_positive_loop(
    i: &SymbolicState,
    d: &ActionDescription,
    r_e: &dyn Fn(&SymbolicState, ActionId) -> f64,
) -> Result<bool, PlanError> {
    let mut g = TransitionGraph::new();
    let start = g.intern(i);
    let nodes = g.reachable(start, d)?;
    let mut edges = Vec::new();
    for &u in &nodes {
        for (a, v) in g.successors(u, d)?.to_vec() {
            edges.push((u, v, r_e(g.state(u), a)));
        }
    }
    let n = nodes.iter().max().map_or(0, |m| m + 1);
    let mut dist = vec![0.0f64; n];
    for _ in 0..nodes.len() {
        let mut changed = false;
        for &(u, v, w) in &edges {
            if dist[u] + w > dist[v] {
                dist[v] = dist[u] + w;
                changed = true;
            }
        }
        if !changed {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("the environment's state space is not enumerable")]
    NotEnumerable,
}

/// Optimal values and every optimal action per state.
#[derive(Debug, Clone)]
pub struct PolicyTable<S> {
    pub values: BTreeMap<S, f64>,
    pub optimal: BTreeMap<S, Vec<usize>>,
}

pub const POLICY_TIE_TOL: f64 = 1e-9;

/// Value iteration to a fixpoint; `done` transitions bootstrap zero.
pub fn value_iteration_policy<M: Model>(m: &M, gamma: f64) -> Result<PolicyTable<M::State>, OracleError> {
    let states = m.states().ok_or(OracleError::NotEnumerable)?;
    let index: HashMap<M::State, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let na = m.num_actions();
    let model: Vec<Vec<(Option<usize>, StepOutcome)>> = states
        .iter()
        .map(|s| {
            (0..na)
                .map(|a| {
                    let (next, out) = m.transition(s, a);
                    (if out.done { None } else { index.get(&next).copied() }, out)
                })
                .collect()
        })
        .collect();
    let q = |v: &[f64], i: usize, a: usize| {
        let (next, out) = &model[i][a];
        out.reward + next.map_or(0.0, |j| gamma * v[j])
    };
    let mut v = vec![0.0; states.len()];
    for _ in 0..1_000_000 {
        let mut delta = 0.0f64;
        for i in 0..states.len() {
            let best = (0..na).map(|a| q(&v, i, a)).fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - v[i]).abs());
            v[i] = best;
        }
        if delta < 1e-12 {
            break;
        }
    }
    let mut table = PolicyTable { values: BTreeMap::new(), optimal: BTreeMap::new() };
    for (i, s) in states.iter().enumerate() {
        let qs: Vec<f64> = (0..na).map(|a| q(&v, i, a)).collect();
        let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        table.values.insert(s.clone(), v[i]);
        table.optimal.insert(s.clone(), (0..na).filter(|&a| qs[a] >= best - POLICY_TIE_TOL).collect());
    }
    Ok(table)
}

/// A subtask's sub-MDP: the option's intrinsic reward and termination
/// layered over a base model.
pub struct SubtaskMdp<'a, M, F> {
    pub base: &'a M,
    pub terminates: F,
    pub phi: f64,
}

impl<M: Model, F: Fn(&M::State) -> bool> Model for SubtaskMdp<'_, M, F> {
    type State = M::State;

    fn num_actions(&self) -> usize {
        self.base.num_actions()
    }

    fn transition(&self, s: &M::State, a: usize) -> (M::State, StepOutcome) {
        let (next, out) = self.base.transition(s, a);
        let done = (self.terminates)(&next);
        let reward = if done { self.phi } else { out.reward };
        (next, StepOutcome { reward, done: done || out.done })
    }

    fn states(&self) -> Option<Vec<M::State>> {
        self.base.states()
    }
}

/// Best undiscounted environment return for first reaching a state where
/// `goal` holds within `depth` steps, with the step count achieving it
/// (fewest steps among ties). `None` when unreachable.
pub fn best_subtask_return<M: Model>(
    m: &M,
    start: &M::State,
    goal: &dyn Fn(&M::State) -> bool,
    depth: usize,
) -> Option<(f64, usize)> {
    fn go<M: Model>(
        m: &M,
        s: &M::State,
        goal: &dyn Fn(&M::State) -> bool,
        k: usize,
        memo: &mut HashMap<(M::State, usize), Option<(f64, usize)>>,
    ) -> Option<(f64, usize)> {
        if k == 0 {
            return None;
        }
        if let Some(v) = memo.get(&(s.clone(), k)) {
            return *v;
        }
        let mut best: Option<(f64, usize)> = None;
        for a in 0..m.num_actions() {
            let (next, out) = m.transition(s, a);
            let cand = if goal(&next) {
                Some((out.reward, 1))
            } else if out.done {
                None
            } else {
                go(m, &next, goal, k - 1, memo).map(|(r, n)| (out.reward + r, n + 1))
            };
            if let Some(c) = cand {
                if best.map_or(true, |b| c.0 > b.0 || (c.0 == b.0 && c.1 < b.1)) {
                    best = Some(c);
                }
            }
        }
        memo.insert((s.clone(), k), best);
        best
    }
    if goal(start) {
        return Some((0.0, 0));
    }
    go(m, start, goal, depth, &mut HashMap::new())
}

/// Best total reward of any action sequence of length ≤ `depth`, where an
/// episode may stop at any time and ends when the model says done.
pub fn best_episode_return<M: Model>(m: &M, start: &M::State, depth: usize) -> f64 {
    fn go<M: Model>(m: &M, s: &M::State, k: usize, memo: &mut HashMap<(M::State, usize), f64>) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if let Some(v) = memo.get(&(s.clone(), k)) {
            return *v;
        }
        let mut best = 0.0f64;
        for a in 0..m.num_actions() {
            let (next, out) = m.transition(s, a);
            let rest = if out.done { 0.0 } else { go(m, &next, k - 1, memo) };
            best = best.max(out.reward + rest);
        }
        memo.insert((s.clone(), k), best);
        best
    }
    go(m, start, depth, &mut HashMap::new())
}

/// The concrete taxi state a symbolic state stands for when every
/// subtask before it took the direct route.
pub fn taxi_concrete(d: &ActionDescription, p: &TaxiParams, s: &SymbolicState) -> TaxiState {
    let value = |f: &str| {
        let i = d.fluent_index(f).expect("taxi vocabulary");
        d.fluents[i].domain[s.get(i)].as_str()
    };
    let taxi = match value("at") {
        "start" => p.reset_cell,
        "pass_src" => p.source.cell(),
        "dest" => p.destination.cell(),
        _ => p.coupon_cell,
    };
    let passenger = if value("delivered") == "true" {
        PassengerLoc::At(p.destination)
    } else if value("have_passenger") == "true" {
        PassengerLoc::InTaxi
    } else {
        PassengerLoc::At(p.source)
    };
    TaxiState { taxi, passenger, destination: p.destination, coupon_available: value("coupon_taken") == "false" }
}

/// Exact r_e for every symbolic transition reachable from `i`, computed by
/// exhaustive search in the environment. Unachievable transitions are absent.
pub fn taxi_reward_table(
    d: &ActionDescription,
    p: &TaxiParams,
    i: &SymbolicState,
    depth: usize,
) -> Result<HashMap<(SymbolicState, ActionId), f64>, PlanError> {
    let model = TaxiModel { params: *p };
    let grounding = TaxiGrounding::new(d, *p).expect("taxi vocabulary");
    let mut g = TransitionGraph::new();
    let start = g.intern(i);
    let mut table = HashMap::new();
    for u in g.reachable(start, d)? {
        let from = g.state(u).clone();
        for (a, v) in g.successors(u, d)?.to_vec() {
            let to = g.state(v).clone();
            let goal = |s: &TaxiState| grounding.holds(&to, s);
            if let Some((r, _)) = best_subtask_return(&model, &taxi_concrete(d, p, &from), &goal, depth) {
                table.insert((from.clone(), a), r);
            }
        }
    }
    Ok(table)
}

/// Text report of an optimal plan for audit.
pub fn format_optimum(d: &ActionDescription, plan: &Plan, total: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "optimal total {total:.6} length {}", plan.len());
    for t in &plan.transitions {
        let _ = writeln!(out, "  {} --{}--> {}", d.format_state(&t.from), d.action_name(t.action), d.format_state(&t.to));
    }
    out
}

/// Counts plans with a separate recursion, for cross-checking enumeration.
pub fn count_plans(i: &SymbolicState, d: &ActionDescription, max_len: usize) -> Result<u64, PlanError> {
    fn go(s: &SymbolicState, d: &ActionDescription, k: usize, memo: &mut HashMap<(SymbolicState, usize), u64>) -> Result<u64, PlanError> {
        if k == 0 {
            return Ok(1);
        }
        if let Some(&c) = memo.get(&(s.clone(), k)) {
            return Ok(c);
        }
        let mut c = 1;
        for (_, t) in successors(s, d)? {
            c += go(&t, d, k - 1, memo)?;
        }
        memo.insert((s.clone(), k), c);
        Ok(c)
    }
    go(i, d, max_len, &mut HashMap::new())
}

/// Reward lookup from a table, `default` when absent.
pub fn table_lookup<S: Eq + Hash + Clone>(table: &HashMap<(S, ActionId), f64>, default: f64) -> impl Fn(&S, ActionId) -> f64 + '_ {
    move |s, a| table.get(&(s.clone(), a)).copied().unwrap_or(default)
}
