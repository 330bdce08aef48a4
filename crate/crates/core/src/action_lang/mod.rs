//! Deterministic fragment of the action language BC.
//!
//! Descriptions are grounded at parse time: every schematic variable is
//! expanded over the objects of its sort, so the rest of the crate only ever
//! sees propositional laws over integer-indexed fluents, values and actions.

mod parse;
mod print;

pub use parse::{parse_action_description, ParseError, ParseErrorKind};

use std::fmt;

/// Index of a fluent within its description.
pub type FluentId = usize;
/// Index of a value within a fluent's domain.
pub type ValueId = usize;
/// Index of a ground action within its description.
pub type ActionId = usize;

pub const BOOL_DOMAIN: [&str; 2] = ["false", "true"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentDecl {
    pub name: String,
    pub domain: Vec<String>,
}

impl FluentDecl {
    pub fn new(name: impl Into<String>, domain: &[&str]) -> Self {
        FluentDecl { name: name.into(), domain: domain.iter().map(|v| v.to_string()).collect() }
    }

    pub fn boolean(name: impl Into<String>) -> Self {
        Self::new(name, &BOOL_DOMAIN)
    }

    pub fn is_bool(&self) -> bool {
        self.domain.len() == 2 && self.domain[0] == "false" && self.domain[1] == "true"
    }

    pub fn value_index(&self, value: &str) -> Option<ValueId> {
        self.domain.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FluentAtom {
    pub fluent: FluentId,
    pub value: ValueId,
}

impl FluentAtom {
    pub fn new(fluent: FluentId, value: ValueId) -> Self {
        FluentAtom { fluent, value }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CausalLaw {
    /// `head if body`, within one state.
    Static { head: FluentAtom, body: Vec<FluentAtom> },
    /// `action causes head if body`, across one step.
    Dynamic { action: ActionId, head: FluentAtom, body: Vec<FluentAtom> },
    /// `nonexecutable action if body`.
    Nonexecutable { action: ActionId, body: Vec<FluentAtom> },
    /// The fluent keeps its value unless something forces a change.
    Inertial { fluent: FluentId },
    /// `head if body` unless something else determines the fluent.
    Default { head: FluentAtom, body: Vec<FluentAtom> },
}

impl CausalLaw {
    pub fn body(&self) -> &[FluentAtom] {
        match self {
            CausalLaw::Static { body, .. }
            | CausalLaw::Dynamic { body, .. }
            | CausalLaw::Nonexecutable { body, .. }
            | CausalLaw::Default { body, .. } => body,
            CausalLaw::Inertial { .. } => &[],
        }
    }

    pub fn head(&self) -> Option<FluentAtom> {
        match self {
            CausalLaw::Static { head, .. }
            | CausalLaw::Dynamic { head, .. }
            | CausalLaw::Default { head, .. } => Some(*head),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CausalLaw::Static { .. } => "static",
            CausalLaw::Dynamic { .. } => "dynamic",
            CausalLaw::Nonexecutable { .. } => "nonexecutable",
            CausalLaw::Inertial { .. } => "inertial",
            CausalLaw::Default { .. } => "default",
        }
    }
}

/// A complete assignment of one domain value to every fluent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicState(Vec<ValueId>);

impl SymbolicState {
    pub fn from_values(values: Vec<ValueId>) -> Self {
        SymbolicState(values)
    }

    pub fn values(&self) -> &[ValueId] {
        &self.0
    }

    pub fn get(&self, f: FluentId) -> ValueId {
        self.0[f]
    }

    pub fn holds(&self, atom: FluentAtom) -> bool {
        self.0.get(atom.fluent) == Some(&atom.value)
    }

    pub fn satisfies(&self, body: &[FluentAtom]) -> bool {
        body.iter().all(|a| self.holds(*a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Index into `ActionDescription::laws`, when a law is at fault.
    pub law: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.law {
            Some(i) => write!(f, "law {}: {}", i + 1, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Why a partial state or a successor could not be completed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureError {
    /// Two strict sources disagree on this fluent.
    Conflict(FluentId),
    /// Nothing determines this fluent.
    Uncovered(FluentId),
    /// Static laws keep flipping a fluent; only possible on unvalidated input.
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("value `{value}` is not in the domain of `{fluent}`")]
    UnknownValue { fluent: String, value: String },
    #[error("conflicting values derived for `{0}`")]
    Conflict(String),
    #[error("no value determined for `{0}`")]
    Uncovered(String),
    #[error("static laws do not reach a fixpoint")]
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDescription {
    pub fluents: Vec<FluentDecl>,
    pub actions: Vec<String>,
    pub laws: Vec<CausalLaw>,
}

impl ActionDescription {
    pub fn new(fluents: Vec<FluentDecl>, actions: Vec<String>, laws: Vec<CausalLaw>) -> Self {
        ActionDescription { fluents, actions, laws }
    }

    pub fn fluent_index(&self, name: &str) -> Option<FluentId> {
        self.fluents.iter().position(|f| f.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a]
    }

    /// Builds an atom from names.
    pub fn atom(&self, fluent: &str, value: &str) -> Result<FluentAtom, StateError> {
        let f = self.fluent_index(fluent).ok_or_else(|| StateError::UnknownFluent(fluent.to_string()))?;
        let v = self.fluents[f].value_index(value).ok_or_else(|| StateError::UnknownValue {
            fluent: fluent.to_string(),
            value: value.to_string(),
        })?;
        Ok(FluentAtom::new(f, v))
    }

    pub fn format_atom(&self, atom: FluentAtom) -> String {
        let decl = &self.fluents[atom.fluent];
        format!("{}={}", decl.name, decl.domain[atom.value])
    }

    /// Canonical listing, `f1=v1,f2=v2,...` in declaration order.
    pub fn format_state(&self, s: &SymbolicState) -> String {
        s.values()
            .iter()
            .enumerate()
            .map(|(f, &v)| self.format_atom(FluentAtom::new(f, v)))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses a listing such as `loc=mp,picked_key=false` (spaces allowed)
    /// and completes it with defaults and static laws.
    pub fn parse_state(&self, text: &str) -> Result<SymbolicState, StateError> {
        let mut atoms = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (f, v) = part
                .split_once('=')
                .ok_or_else(|| StateError::UnknownFluent(part.to_string()))?;
            atoms.push(self.atom(f.trim(), v.trim())?);
        }
        self.complete_state(&atoms)
    }

    /// Extends a partial assignment to a complete, statically closed state.
    /// Given atoms are strict; unset fluents are filled by static and
    /// default laws.
    pub fn complete_state(&self, atoms: &[FluentAtom]) -> Result<SymbolicState, StateError> {
        let n = self.fluents.len();
        let mut value = vec![None; n];
        let mut strict = vec![false; n];
        for a in atoms {
            if a.fluent >= n || a.value >= self.fluents[a.fluent].domain.len() {
                return Err(StateError::UnknownFluent(format!("#{}", a.fluent)));
            }
            if let Some(v) = value[a.fluent] {
                if v != a.value {
                    return Err(StateError::Conflict(self.fluents[a.fluent].name.clone()));
                }
            }
            value[a.fluent] = Some(a.value);
            strict[a.fluent] = true;
        }
        self.close(value, strict).map_err(|e| match e {
            ClosureError::Conflict(f) => StateError::Conflict(self.fluents[f].name.clone()),
            ClosureError::Uncovered(f) => StateError::Uncovered(self.fluents[f].name.clone()),
            ClosureError::Unstable => StateError::Unstable,
        })
    }

    /// Fixpoint shared by state completion and successor computation.
    ///
    /// `strict` values come from the caller and cannot be overridden.
    /// Non-strict values (carried by inertia) yield to static laws, and
    /// unset fluents take a default whose body holds.
    pub(crate) fn close(
        &self,
        mut value: Vec<Option<ValueId>>,
        mut strict: Vec<bool>,
    ) -> Result<SymbolicState, ClosureError> {
        let n = self.fluents.len();
        let holds = |value: &[Option<ValueId>], body: &[FluentAtom]| {
            body.iter().all(|a| a.fluent < n && value[a.fluent] == Some(a.value))
        };
        let budget = 4 * (n + 1) * (self.laws.len() + 1);
        for _ in 0..budget {
            let mut changed = false;
            for law in &self.laws {
                if let CausalLaw::Static { head, body } = law {
                    if head.fluent >= n || !holds(&value, body) {
                        continue;
                    }
                    match value[head.fluent] {
                        Some(v) if v == head.value => strict[head.fluent] = true,
                        Some(_) if strict[head.fluent] => return Err(ClosureError::Conflict(head.fluent)),
                        _ => {
                            value[head.fluent] = Some(head.value);
                            strict[head.fluent] = true;
                            changed = true;
                        }
                    }
                }
            }
            if changed {
                continue;
            }
            for law in &self.laws {
                if let CausalLaw::Default { head, body } = law {
                    if head.fluent < n && value[head.fluent].is_none() && holds(&value, body) {
                        value[head.fluent] = Some(head.value);
                        changed = true;
                    }
                }
            }
            if !changed {
                let mut out = Vec::with_capacity(n);
                for (f, v) in value.iter().enumerate() {
                    out.push(v.ok_or(ClosureError::Uncovered(f))?);
                }
                return Ok(SymbolicState(out));
            }
        }
        Err(ClosureError::Unstable)
    }

    /// Every complete assignment that is closed under the static laws.
    /// Exponential in the number of fluents; meant for desk-scale domains.
    pub fn enumerate_states(&self) -> Vec<SymbolicState> {
        let sizes: Vec<usize> = self.fluents.iter().map(|f| f.domain.len()).collect();
        let mut out = Vec::new();
        if sizes.iter().any(|&s| s == 0) {
            return out;
        }
        let mut cur = vec![0; sizes.len()];
        loop {
            let s = SymbolicState(cur.clone());
            let closed = self.laws.iter().all(|law| match law {
                CausalLaw::Static { head, body } => !s.satisfies(body) || s.holds(*head),
                _ => true,
            });
            if closed {
                out.push(s);
            }
            let mut i = sizes.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < sizes[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    /// Checks the description's structural invariants. An empty result
    /// means successor computation cannot fail for lack of coverage.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.fluents.len();
        let global = |message: String| Diagnostic { law: None, message };

        if n == 0 {
            out.push(global("no fluents declared".into()));
        }
        for (i, f) in self.fluents.iter().enumerate() {
            if self.fluents[..i].iter().any(|g| g.name == f.name) {
                out.push(global(format!("duplicate fluent `{}`", f.name)));
            }
            if f.domain.is_empty() {
                out.push(global(format!("fluent `{}` has an empty domain", f.name)));
            }
            for (j, v) in f.domain.iter().enumerate() {
                if f.domain[..j].contains(v) {
                    out.push(global(format!("fluent `{}` repeats value `{}`", f.name, v)));
                }
            }
        }
        for (i, a) in self.actions.iter().enumerate() {
            if self.actions[..i].contains(a) {
                out.push(global(format!("duplicate action `{a}`")));
            }
        }

        let atom_ok = |a: &FluentAtom| a.fluent < n && a.value < self.fluents[a.fluent].domain.len();
        for (i, law) in self.laws.iter().enumerate() {
            let text = self.format_law(law);
            let mut bad = |what: &str| {
                out.push(Diagnostic { law: Some(i), message: format!("{what} in `{text}`") });
            };
            if let Some(h) = law.head() {
                if !atom_ok(&h) {
                    bad("head refers to an undeclared fluent or value");
                }
            }
            if !law.body().iter().all(atom_ok) {
                bad("body refers to an undeclared fluent or value");
            }
            match law {
                CausalLaw::Dynamic { action, .. } | CausalLaw::Nonexecutable { action, .. }
                    if *action >= self.actions.len() =>
                {
                    bad("undeclared action")
                }
                CausalLaw::Inertial { fluent } if *fluent >= n => bad("undeclared fluent"),
                _ => {}
            }
        }

        // Default heads must not clash under an identical body.
        for (i, law) in self.laws.iter().enumerate() {
            if let CausalLaw::Default { head, body } = law {
                let clash = self.laws[..i].iter().any(|other| match other {
                    CausalLaw::Default { head: h2, body: b2 } => {
                        h2.fluent == head.fluent && h2.value != head.value && same_set(body, b2)
                    }
                    _ => false,
                });
                if clash {
                    out.push(Diagnostic {
                        law: Some(i),
                        message: format!("conflicting default for the same body in `{}`", self.format_law(law)),
                    });
                }
            }
        }

        // Coverage: inertia or an unconditional default.
        for (f, decl) in self.fluents.iter().enumerate() {
            let covered = self.laws.iter().any(|law| match law {
                CausalLaw::Inertial { fluent } => *fluent == f,
                CausalLaw::Default { head, body } => head.fluent == f && body.is_empty(),
                _ => false,
            });
            if !covered {
                out.push(global(format!(
                    "uncovered fluent `{}`: neither inertial nor given an unconditional default",
                    decl.name
                )));
            }
        }

        // Stratification: no cycle through static heads.
        let mut edges = vec![Vec::new(); n];
        for law in &self.laws {
            if let CausalLaw::Static { head, body } = law {
                if head.fluent < n {
                    for b in body.iter().filter(|b| b.fluent < n) {
                        edges[b.fluent].push(head.fluent);
                    }
                }
            }
        }
        if let Some(f) = find_cycle(&edges) {
            let culprit = self.laws.iter().position(|law| matches!(law, CausalLaw::Static { head, .. } if head.fluent == f));
            out.push(Diagnostic {
                law: culprit,
                message: format!("static laws are not stratified: `{}` depends on itself", self.fluents[f].name),
            });
        }
        out
    }

    pub fn format_law(&self, law: &CausalLaw) -> String {
        print::law_to_string(self, law)
    }
}

fn same_set(a: &[FluentAtom], b: &[FluentAtom]) -> bool {
    a.iter().all(|x| b.contains(x)) && b.iter().all(|x| a.contains(x))
}

/// Returns some node on a directed cycle, if any.
fn find_cycle(edges: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    fn visit(v: usize, edges: &[Vec<usize>], mark: &mut [Mark]) -> Option<usize> {
        mark[v] = Mark::Open;
        for &w in &edges[v] {
            match mark[w] {
                Mark::Open => return Some(w),
                Mark::New => {
                    if let Some(c) = visit(w, edges, mark) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        mark[v] = Mark::Done;
        None
    }
    let mut mark = vec![Mark::New; edges.len()];
    (0..edges.len()).find_map(|v| if mark[v] == Mark::New { visit(v, edges, &mut mark) } else { None })
}

impl fmt::Display for ActionDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_description(self, f)
    }
}
