//! Successor semantics, plan quality and exhaustive quality-maximizing search.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::action_lang::{ActionDescription, ActionId, CausalLaw, ClosureError, SymbolicState};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("inconsistent effects: action `{action}` derives conflicting values for `{fluent}`")]
    InconsistentEffects { action: String, fluent: String },
    #[error("uncovered fluent: nothing determines `{fluent}` after `{action}`")]
    UncoveredFluent { action: String, fluent: String },
    #[error("static laws do not stabilize after `{action}`")]
    Unstable { action: String },
    #[error("malformed plan: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicTransition {
    pub from: SymbolicState,
    pub action: ActionId,
    pub to: SymbolicState,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub transitions: Vec<SymbolicTransition>,
}

impl Plan {
    pub fn empty() -> Self {
        Plan::default()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_chained(&self) -> bool {
        self.transitions.windows(2).all(|w| w[0].to == w[1].from)
    }

    pub fn action_names<'a>(&self, d: &'a ActionDescription) -> Vec<&'a str> {
        self.transitions.iter().map(|t| d.action_name(t.action)).collect()
    }

    /// Text form: one `hash action hash'` line per transition, then a
    /// listing of every state that appears.
    pub fn serialize(&self, d: &ActionDescription, rho: &RhoTable) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# quality {:.6}", plan_quality(self, rho));
        let _ = writeln!(out, "# length {}", self.len());
        for t in &self.transitions {
            let _ = writeln!(out, "{} {} {}", state_hash_hex(d, &t.from), d.action_name(t.action), state_hash_hex(d, &t.to));
        }
        let _ = writeln!(out, "# states");
        let mut seen: Vec<&SymbolicState> = Vec::new();
        for t in &self.transitions {
            for s in [&t.from, &t.to] {
                if !seen.contains(&s) {
                    seen.push(s);
                    let _ = writeln!(out, "{} {}", state_hash_hex(d, s), d.format_state(s));
                }
            }
        }
        out
    }

    /// Inverse of [`Plan::serialize`]; checks that every transition is a
    /// genuine successor and that the plan is chained.
    pub fn deserialize(text: &str, d: &ActionDescription) -> Result<Plan, PlanError> {
        let mut rows = Vec::new();
        let mut states = HashMap::new();
        let mut in_states = false;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line == "# states" {
                in_states = true;
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match (in_states, parts.as_slice()) {
                (false, [a, b, c]) => rows.push((a.to_string(), b.to_string(), c.to_string())),
                (true, [h, listing]) => {
                    let s = d.parse_state(listing).map_err(|e| PlanError::Malformed(e.to_string()))?;
                    if state_hash_hex(d, &s) != *h {
                        return Err(PlanError::Malformed(format!("hash mismatch for `{listing}`")));
                    }
                    states.insert(h.to_string(), s);
                }
                _ => return Err(PlanError::Malformed(format!("unexpected line `{line}`"))),
            }
        }
        let lookup = |h: &str| states.get(h).cloned().ok_or_else(|| PlanError::Malformed(format!("unlisted state {h}")));
        let mut plan = Plan::empty();
        for (from, action, to) in rows {
            let from = lookup(&from)?;
            let to = lookup(&to)?;
            let action = d.action_index(&action).ok_or_else(|| PlanError::Malformed(format!("unknown action `{action}`")))?;
            let next = successors(&from, d)?.into_iter().find(|(a, _)| *a == action);
            if next.as_ref().map(|(_, s)| s) != Some(&to) {
                return Err(PlanError::Malformed(format!("`{}` does not lead to the listed state", d.action_name(action))));
            }
            plan.transitions.push(SymbolicTransition { from, action, to });
        }
        if !plan.is_chained() {
            return Err(PlanError::Malformed("transitions are not chained".into()));
        }
        Ok(plan)
    }
}

/// Gain rewards used as plan-quality facts, with an optimistic default.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoTable {
    pub default_inf: f64,
    facts: HashMap<(SymbolicState, ActionId), f64>,
}

impl RhoTable {
    pub fn new(default_inf: f64) -> Self {
        assert!(default_inf > 0.0, "default_inf must be positive");
        RhoTable { default_inf, facts: HashMap::new() }
    }

    pub fn get(&self, s: &SymbolicState, a: ActionId) -> f64 {
        self.facts.get(&(s.clone(), a)).copied().unwrap_or(self.default_inf)
    }

    pub fn fact(&self, s: &SymbolicState, a: ActionId) -> Option<f64> {
        self.facts.get(&(s.clone(), a)).copied()
    }

    pub fn set(&mut self, s: SymbolicState, a: ActionId, v: f64) {
        self.facts.insert((s, a), v);
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicGoal {
    pub threshold: f64,
}

impl IntrinsicGoal {
    pub fn new(threshold: f64) -> Self {
        assert!(threshold.is_finite(), "goal threshold must be finite");
        IntrinsicGoal { threshold }
    }
}

/// All executable actions in `s` with their unique successor state.
pub fn successors(s: &SymbolicState, d: &ActionDescription) -> Result<Vec<(ActionId, SymbolicState)>, PlanError> {
    let n = d.fluents.len();
    let mut out = Vec::new();
    for a in 0..d.actions.len() {
        let blocked = d
            .laws
            .iter()
            .any(|law| matches!(law, CausalLaw::Nonexecutable { action, body } if *action == a && s.satisfies(body)));
        if blocked {
            continue;
        }
        let mut value = vec![None; n];
        let mut strict = vec![false; n];
        for law in &d.laws {
            if let CausalLaw::Dynamic { action, head, body } = law {
                if *action != a || !s.satisfies(body) {
                    continue;
                }
                match value[head.fluent] {
                    Some(v) if v != head.value => {
                        return Err(PlanError::InconsistentEffects {
                            action: d.action_name(a).to_string(),
                            fluent: d.fluents[head.fluent].name.clone(),
                        })
                    }
                    _ => {
                        value[head.fluent] = Some(head.value);
                        strict[head.fluent] = true;
                    }
                }
            }
        }
        for law in &d.laws {
            if let CausalLaw::Inertial { fluent } = law {
                if *fluent < n && value[*fluent].is_none() {
                    value[*fluent] = Some(s.get(*fluent));
                }
            }
        }
        let next = d.close(value, strict).map_err(|e| {
            let action = d.action_name(a).to_string();
            match e {
                ClosureError::Conflict(f) => PlanError::InconsistentEffects { action, fluent: d.fluents[f].name.clone() },
                ClosureError::Uncovered(f) => PlanError::UncoveredFluent { action, fluent: d.fluents[f].name.clone() },
                ClosureError::Unstable => PlanError::Unstable { action },
            }
        })?;
        out.push((a, next));
    }
    Ok(out)
}

pub fn plan_quality(p: &Plan, rho: &RhoTable) -> f64 {
    p.transitions.iter().map(|t| rho.get(&t.from, t.action)).sum()
}

/// Interned states with memoized successor lists.
#[derive(Debug, Default, Clone)]
pub struct TransitionGraph {
    ids: HashMap<SymbolicState, usize>,
    states: Vec<SymbolicState>,
    succ: Vec<Option<Vec<(ActionId, usize)>>>,
}

impl TransitionGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, s: &SymbolicState) -> usize {
        if let Some(&i) = self.ids.get(s) {
            return i;
        }
        let i = self.states.len();
        self.ids.insert(s.clone(), i);
        self.states.push(s.clone());
        self.succ.push(None);
        i
    }

    pub fn state(&self, i: usize) -> &SymbolicState {
        &self.states[i]
    }

    pub fn successors(&mut self, i: usize, d: &ActionDescription) -> Result<&[(ActionId, usize)], PlanError> {
        if self.succ[i].is_none() {
            let list = successors(&self.states[i].clone(), d)?;
            let ids = list.into_iter().map(|(a, s)| (a, self.intern(&s))).collect();
            self.succ[i] = Some(ids);
        }
        Ok(self.succ[i].as_deref().unwrap_or(&[]))
    }

    /// Every state reachable from `i` (including `i`), in discovery order.
    pub fn reachable(&mut self, i: usize, d: &ActionDescription) -> Result<Vec<usize>, PlanError> {
        let mut seen = vec![i];
        let mut k = 0;
        while k < seen.len() {
            let next: Vec<usize> = self.successors(seen[k], d)?.iter().map(|&(_, j)| j).collect();
            for j in next {
                if !seen.contains(&j) {
                    seen.push(j);
                }
            }
            k += 1;
        }
        Ok(seen)
    }
}

/// Best achievable (quality, length) from a state within a step budget.
#[derive(Debug, Clone, Copy)]
struct Best {
    value: f64,
    len: usize,
}

/// `a` beats `b`: higher quality, then shorter.
fn better(a: Best, b: Best) -> bool {
    a.value > b.value || (a.value == b.value && a.len < b.len)
}

struct Search<'a> {
    d: &'a ActionDescription,
    rho: &'a RhoTable,
    graph: TransitionGraph,
    memo: HashMap<(usize, usize), Best>,
}

impl Search<'_> {
    fn best(&mut self, s: usize, k: usize) -> Result<Best, PlanError> {
        let mut best = Best { value: 0.0, len: 0 };
        if k == 0 {
            return Ok(best);
        }
        if let Some(b) = self.memo.get(&(s, k)) {
            return Ok(*b);
        }
        let succ = self.graph.successors(s, self.d)?.to_vec();
        for (a, t) in succ {
            let rest = self.best(t, k - 1)?;
            let cand = Best { value: self.rho.get(self.graph.state(s), a) + rest.value, len: rest.len + 1 };
            if better(cand, best) {
                best = cand;
            }
        }
        self.memo.insert((s, k), best);
        Ok(best)
    }
}

/// Highest-quality plan of length ≤ `max_len` whose quality strictly exceeds
/// the goal threshold. Ties go to the shortest plan, then to the
/// lexicographically smallest action-name sequence.
pub fn find_plan(
    i: &SymbolicState,
    g: &IntrinsicGoal,
    d: &ActionDescription,
    rho: &RhoTable,
    max_len: usize,
) -> Result<Option<Plan>, PlanError> {
    search_plan(i, g, d, rho, max_len, false)
}

/// As [`find_plan`], but the empty plan is never a candidate.
pub fn find_nonempty_plan(
    i: &SymbolicState,
    g: &IntrinsicGoal,
    d: &ActionDescription,
    rho: &RhoTable,
    max_len: usize,
) -> Result<Option<Plan>, PlanError> {
    search_plan(i, g, d, rho, max_len, true)
}

fn search_plan(
    i: &SymbolicState,
    g: &IntrinsicGoal,
    d: &ActionDescription,
    rho: &RhoTable,
    max_len: usize,
    nonempty: bool,
) -> Result<Option<Plan>, PlanError> {
    let mut search = Search { d, rho, graph: TransitionGraph::new(), memo: HashMap::new() };
    let start = search.graph.intern(i);
    let target = if nonempty {
        let mut first: Option<Best> = None;
        if max_len > 0 {
            for (a, t) in search.graph.successors(start, d)?.to_vec() {
                let rest = search.best(t, max_len - 1)?;
                let cand = Best { value: rho.get(search.graph.state(start), a) + rest.value, len: rest.len + 1 };
                if first.map_or(true, |b| better(cand, b)) {
                    first = Some(cand);
                }
            }
        }
        match first {
            Some(b) => b,
            None => return Ok(None),
        }
    } else {
        search.best(start, max_len)?
    };
    if target.value <= g.threshold {
        return Ok(None);
    }

    let mut plan = Plan::empty();
    let (mut s, mut k) = (start, max_len);
    let mut want = target;
    while want.len > 0 {
        let succ = search.graph.successors(s, d)?.to_vec();
        let mut pick: Option<(ActionId, usize, Best)> = None;
        for (a, t) in succ {
            let rest = search.best(t, k - 1)?;
            let cand = Best { value: rho.get(search.graph.state(s), a) + rest.value, len: rest.len + 1 };
            if cand.value == want.value && cand.len == want.len {
                let smaller = pick.map_or(true, |(b, _, _)| d.action_name(a) < d.action_name(b));
                if smaller {
                    pick = Some((a, t, rest));
                }
            }
        }
        let (a, t, rest) = pick.ok_or_else(|| PlanError::Malformed("plan reconstruction lost its target".into()))?;
        plan.transitions.push(SymbolicTransition {
            from: search.graph.state(s).clone(),
            action: a,
            to: search.graph.state(t).clone(),
        });
        s = t;
        k -= 1;
        want = rest;
    }
    // The search sums back to front; the returned plan must clear the bar
    // when summed in execution order too.
    if plan_quality(&plan, rho) <= g.threshold {
        return Ok(None);
    }
    Ok(Some(plan))
}

/// 64-bit FNV-1a over the canonical atom listing.
pub fn state_hash(d: &ActionDescription, s: &SymbolicState) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in d.format_state(s).bytes() {
        h ^= u64::from(byte);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn state_hash_hex(d: &ActionDescription, s: &SymbolicState) -> String {
    format!("{:016x}", state_hash(d, s))
}

#[cfg(test)]
mod tests;
