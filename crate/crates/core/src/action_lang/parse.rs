//! Line-oriented parser with grounding of schematic variables.

use std::collections::HashMap;
use std::fmt;

use super::{ActionDescription, CausalLaw, FluentAtom, FluentDecl, BOOL_DOMAIN};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    NoFluents,
    DuplicateFluent(String),
    DuplicateSort(String),
    UndeclaredSort(String),
    UndeclaredFluent(String),
    UndeclaredValue { fluent: String, value: String },
    UndeclaredAction(String),
    UndeclaredObject { action: String, object: String },
    UnboundVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl std::error::Error for ParseError {}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::NoFluents => write!(f, "no fluents declared"),
            ParseErrorKind::DuplicateFluent(n) => write!(f, "duplicate fluent declaration `{n}`"),
            ParseErrorKind::DuplicateSort(n) => write!(f, "duplicate sort declaration `{n}`"),
            ParseErrorKind::UndeclaredSort(n) => write!(f, "undeclared sort `{n}`"),
            ParseErrorKind::UndeclaredFluent(n) => write!(f, "undeclared fluent `{n}`"),
            ParseErrorKind::UndeclaredValue { fluent, value } => {
                write!(f, "undeclared value `{value}` for fluent `{fluent}`")
            }
            ParseErrorKind::UndeclaredAction(n) => write!(f, "undeclared action `{n}`"),
            ParseErrorKind::UndeclaredObject { action, object } => {
                write!(f, "undeclared object `{object}` in action `{action}`")
            }
            ParseErrorKind::UnboundVariable(v) => write!(f, "variable `{v}` has no sort to range over"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '%' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Word(chars[start..i].iter().collect()), col: start + 1 });
        } else if "={}(),:".contains(c) {
            out.push(Token { tok: Tok::Punct(c), col: i + 1 });
            i += 1;
        } else {
            return Err(ParseError {
                line: lineno,
                column: i + 1,
                kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
            });
        }
    }
    Ok(out)
}

fn is_variable(w: &str) -> bool {
    w.starts_with(|c: char| c.is_ascii_uppercase())
}

/// A term is a constant or a schematic variable.
#[derive(Debug, Clone)]
struct Term {
    name: String,
    col: usize,
}

impl Term {
    fn is_var(&self) -> bool {
        is_variable(&self.name)
    }
}

#[derive(Debug, Clone)]
struct RawAtom {
    fluent: Term,
    value: Term,
}

#[derive(Debug, Clone)]
struct RawAction {
    name: Term,
    args: Vec<Term>,
}

#[derive(Debug, Clone)]
enum RawLaw {
    Static { head: RawAtom, body: Vec<RawAtom> },
    Dynamic { action: RawAction, head: RawAtom, body: Vec<RawAtom> },
    Nonexecutable { action: RawAction, body: Vec<RawAtom> },
    Inertial { fluents: Vec<Term> },
    Default { head: RawAtom, body: Vec<RawAtom> },
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    line_len: usize,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.line_len + 1, |t| t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.col(), kind: ParseErrorKind::Syntax(msg.into()) }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn word(&mut self, what: &str) -> Result<Term, ParseError> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Word(w), col }) => {
                self.pos += 1;
                Ok(Term { name: w.clone(), col: *col })
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(w)) if w == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ParseError> {
        let fluent = self.word("fluent name")?;
        self.punct('=')?;
        let value = self.word("value")?;
        Ok(RawAtom { fluent, value })
    }

    fn body(&mut self) -> Result<Vec<RawAtom>, ParseError> {
        let mut body = Vec::new();
        if self.eat_keyword("if") {
            body.push(self.atom()?);
            while self.eat_punct(',') {
                body.push(self.atom()?);
            }
        }
        self.end()?;
        Ok(body)
    }

    fn action(&mut self) -> Result<RawAction, ParseError> {
        let name = self.word("action name")?;
        let mut args = Vec::new();
        if self.eat_punct('(') {
            args.push(self.word("argument")?);
            while self.eat_punct(',') {
                args.push(self.word("argument")?);
            }
            self.punct(')')?;
        }
        Ok(RawAction { name, args })
    }
}

/// Objects admissible at each argument position of an action family.
#[derive(Debug)]
struct Family {
    positions: Vec<Vec<String>>,
}

struct Builder {
    sorts: HashMap<String, Vec<String>>,
    fluents: Vec<FluentDecl>,
    actions: Vec<String>,
    families: HashMap<String, Family>,
    laws: Vec<CausalLaw>,
}

fn ground_name(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{}({})", name, args.join(","))
    }
}

/// Parses and grounds an action description.
pub fn parse_action_description(text: &str) -> Result<ActionDescription, ParseError> {
    let mut b = Builder {
        sorts: HashMap::new(),
        fluents: Vec::new(),
        actions: Vec::new(),
        families: HashMap::new(),
        laws: Vec::new(),
    };
    b.sorts.insert("bool".into(), BOOL_DOMAIN.iter().map(|s| s.to_string()).collect());

    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let toks = tokenize(line, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor { toks: &toks, pos: 0, line: lineno, line_len: line.chars().count() };
        let kw = c.word("a statement keyword")?;
        match kw.name.as_str() {
            "sort" => b.sort_decl(&mut c)?,
            "fluent" => b.fluent_decl(&mut c)?,
            "action" => b.action_decl(&mut c)?,
            "static" => {
                let head = c.atom()?;
                let body = c.body()?;
                b.ground(lineno, RawLaw::Static { head, body })?;
            }
            "default" => {
                let head = c.atom()?;
                let body = c.body()?;
                b.ground(lineno, RawLaw::Default { head, body })?;
            }
            "dynamic" => {
                let action = c.action()?;
                if !c.eat_keyword("causes") {
                    return Err(c.err("expected `causes`"));
                }
                let head = c.atom()?;
                let body = c.body()?;
                b.ground(lineno, RawLaw::Dynamic { action, head, body })?;
            }
            "nonexecutable" => {
                let action = c.action()?;
                let body = c.body()?;
                b.ground(lineno, RawLaw::Nonexecutable { action, body })?;
            }
            "inertial" => {
                let mut fluents = vec![c.word("fluent name")?];
                while c.eat_punct(',') {
                    fluents.push(c.word("fluent name")?);
                }
                c.end()?;
                b.ground(lineno, RawLaw::Inertial { fluents })?;
            }
            other => {
                return Err(ParseError {
                    line: lineno,
                    column: kw.col,
                    kind: ParseErrorKind::Syntax(format!("unknown statement `{other}`")),
                })
            }
        }
    }
    if b.fluents.is_empty() {
        return Err(ParseError { line: last_line.max(1), column: 1, kind: ParseErrorKind::NoFluents });
    }
    Ok(ActionDescription::new(b.fluents, b.actions, b.laws))
}

impl Builder {
    fn sort_decl(&mut self, c: &mut Cursor) -> Result<(), ParseError> {
        let name = c.word("sort name")?;
        c.punct('=')?;
        c.punct('{')?;
        let mut objs = Vec::new();
        if !c.eat_punct('}') {
            loop {
                let o = c.word("object")?;
                if o.is_var() {
                    return Err(ParseError {
                        line: c.line,
                        column: o.col,
                        kind: ParseErrorKind::Syntax(format!("object `{}` must not start uppercase", o.name)),
                    });
                }
                if objs.contains(&o.name) {
                    return Err(ParseError {
                        line: c.line,
                        column: o.col,
                        kind: ParseErrorKind::Syntax(format!("object `{}` listed twice", o.name)),
                    });
                }
                objs.push(o.name);
                if c.eat_punct('}') {
                    break;
                }
                c.punct(',')?;
            }
        }
        c.end()?;
        if objs.is_empty() {
            return Err(ParseError {
                line: c.line,
                column: name.col,
                kind: ParseErrorKind::Syntax(format!("sort `{}` is empty", name.name)),
            });
        }
        if self.sorts.contains_key(&name.name) {
            return Err(ParseError { line: c.line, column: name.col, kind: ParseErrorKind::DuplicateSort(name.name) });
        }
        self.sorts.insert(name.name, objs);
        Ok(())
    }

    fn fluent_decl(&mut self, c: &mut Cursor) -> Result<(), ParseError> {
        let name = c.word("fluent name")?;
        c.punct(':')?;
        let sort = c.word("sort name")?;
        c.end()?;
        if is_variable(&name.name) {
            return Err(ParseError {
                line: c.line,
                column: name.col,
                kind: ParseErrorKind::Syntax("fluent names must not start uppercase".into()),
            });
        }
        let domain = self.sorts.get(&sort.name).cloned().ok_or(ParseError {
            line: c.line,
            column: sort.col,
            kind: ParseErrorKind::UndeclaredSort(sort.name.clone()),
        })?;
        if self.fluents.iter().any(|f| f.name == name.name) {
            return Err(ParseError { line: c.line, column: name.col, kind: ParseErrorKind::DuplicateFluent(name.name) });
        }
        self.fluents.push(FluentDecl { name: name.name, domain });
        Ok(())
    }

    fn action_decl(&mut self, c: &mut Cursor) -> Result<(), ParseError> {
        let name = c.word("action name")?;
        let mut params: Vec<Vec<String>> = Vec::new();
        if c.eat_punct('(') {
            loop {
                let p = c.word("parameter")?;
                if p.is_var() {
                    c.punct(':')?;
                    let sort = c.word("sort name")?;
                    let objs = self.sorts.get(&sort.name).cloned().ok_or(ParseError {
                        line: c.line,
                        column: sort.col,
                        kind: ParseErrorKind::UndeclaredSort(sort.name.clone()),
                    })?;
                    params.push(objs);
                } else {
                    params.push(vec![p.name]);
                }
                if c.eat_punct(')') {
                    break;
                }
                c.punct(',')?;
            }
        }
        c.end()?;
        let family = self
            .families
            .entry(name.name.clone())
            .or_insert_with(|| Family { positions: vec![Vec::new(); params.len()] });
        if family.positions.len() != params.len() {
            return Err(ParseError {
                line: c.line,
                column: name.col,
                kind: ParseErrorKind::Syntax(format!("action `{}` declared with a different arity", name.name)),
            });
        }
        for (slot, objs) in family.positions.iter_mut().zip(&params) {
            for o in objs {
                if !slot.contains(o) {
                    slot.push(o.clone());
                }
            }
        }
        for args in cartesian(&params) {
            let g = ground_name(&name.name, &args);
            if !self.actions.contains(&g) {
                self.actions.push(g);
            }
        }
        Ok(())
    }

    fn fluent(&self, line: usize, t: &Term) -> Result<usize, ParseError> {
        if t.is_var() {
            return Err(ParseError {
                line,
                column: t.col,
                kind: ParseErrorKind::Syntax(format!("fluent position holds variable `{}`", t.name)),
            });
        }
        self.fluents.iter().position(|f| f.name == t.name).ok_or(ParseError {
            line,
            column: t.col,
            kind: ParseErrorKind::UndeclaredFluent(t.name.clone()),
        })
    }

    /// Records a constraint `var ∈ objs`, intersecting with earlier ones.
    fn constrain(vars: &mut Vec<(String, usize, Option<Vec<String>>)>, t: &Term, objs: &[String]) {
        match vars.iter_mut().find(|(n, _, _)| *n == t.name) {
            Some((_, _, dom)) => {
                let next = match dom.take() {
                    Some(d) => d.into_iter().filter(|o| objs.contains(o)).collect(),
                    None => objs.to_vec(),
                };
                *dom = Some(next);
            }
            None => vars.push((t.name.clone(), t.col, Some(objs.to_vec()))),
        }
    }

    fn ground(&mut self, line: usize, law: RawLaw) -> Result<(), ParseError> {
        // Collect variables with the domains implied by where they occur.
        let mut vars: Vec<(String, usize, Option<Vec<String>>)> = Vec::new();
        let mut atoms: Vec<&RawAtom> = Vec::new();
        let mut action: Option<&RawAction> = None;
        match &law {
            RawLaw::Static { head, body } | RawLaw::Default { head, body } => {
                atoms.push(head);
                atoms.extend(body);
            }
            RawLaw::Dynamic { action: a, head, body } => {
                action = Some(a);
                atoms.push(head);
                atoms.extend(body);
            }
            RawLaw::Nonexecutable { action: a, body } => {
                action = Some(a);
                atoms.extend(body);
            }
            RawLaw::Inertial { fluents } => {
                for t in fluents {
                    let f = self.fluent(line, t)?;
                    self.laws.push(CausalLaw::Inertial { fluent: f });
                }
                return Ok(());
            }
        }
        if let Some(a) = action {
            let fam = self.families.get(&a.name.name).ok_or(ParseError {
                line,
                column: a.name.col,
                kind: ParseErrorKind::UndeclaredAction(a.name.name.clone()),
            })?;
            if fam.positions.len() != a.args.len() {
                return Err(ParseError {
                    line,
                    column: a.name.col,
                    kind: ParseErrorKind::Syntax(format!(
                        "action `{}` takes {} argument(s)",
                        a.name.name,
                        fam.positions.len()
                    )),
                });
            }
            for (arg, objs) in a.args.iter().zip(&fam.positions) {
                if arg.is_var() {
                    Self::constrain(&mut vars, arg, objs);
                } else if !objs.contains(&arg.name) {
                    return Err(ParseError {
                        line,
                        column: arg.col,
                        kind: ParseErrorKind::UndeclaredObject {
                            action: a.name.name.clone(),
                            object: arg.name.clone(),
                        },
                    });
                }
            }
        }
        for atom in &atoms {
            let f = self.fluent(line, &atom.fluent)?;
            let dom = &self.fluents[f].domain;
            if atom.value.is_var() {
                let dom = dom.clone();
                Self::constrain(&mut vars, &atom.value, &dom);
            } else if !dom.contains(&atom.value.name) {
                return Err(ParseError {
                    line,
                    column: atom.value.col,
                    kind: ParseErrorKind::UndeclaredValue {
                        fluent: atom.fluent.name.clone(),
                        value: atom.value.name.clone(),
                    },
                });
            }
        }
        let mut names = Vec::new();
        let mut domains = Vec::new();
        for (n, col, dom) in vars {
            match dom {
                Some(d) => {
                    names.push(n);
                    domains.push(d);
                }
                None => return Err(ParseError { line, column: col, kind: ParseErrorKind::UnboundVariable(n) }),
            }
        }

        for binding in cartesian(&domains) {
            let subst = |t: &Term| -> String {
                if t.is_var() {
                    let i = names.iter().position(|n| *n == t.name).expect("bound variable");
                    binding[i].clone()
                } else {
                    t.name.clone()
                }
            };
            let ground_atom = |a: &RawAtom| -> FluentAtom {
                let f = self.fluents.iter().position(|d| d.name == a.fluent.name).expect("checked fluent");
                let v = self.fluents[f].value_index(&subst(&a.value)).expect("checked value");
                FluentAtom::new(f, v)
            };
            let ground_action = |a: &RawAction| -> Option<usize> {
                let args: Vec<String> = a.args.iter().map(subst).collect();
                let g = ground_name(&a.name.name, &args);
                self.actions.iter().position(|x| *x == g)
            };
            let ground_body = |body: &[RawAtom]| body.iter().map(ground_atom).collect::<Vec<_>>();
            let law = match &law {
                RawLaw::Static { head, body } => Some(CausalLaw::Static { head: ground_atom(head), body: ground_body(body) }),
                RawLaw::Default { head, body } => {
                    Some(CausalLaw::Default { head: ground_atom(head), body: ground_body(body) })
                }
                RawLaw::Dynamic { action, head, body } => ground_action(action).map(|a| CausalLaw::Dynamic {
                    action: a,
                    head: ground_atom(head),
                    body: ground_body(body),
                }),
                RawLaw::Nonexecutable { action, body } => {
                    ground_action(action).map(|a| CausalLaw::Nonexecutable { action: a, body: ground_body(body) })
                }
                RawLaw::Inertial { .. } => unreachable!(),
            };
            // Combinations that name no declared ground action are skipped.
            if let Some(law) = law {
                self.laws.push(law);
            }
        }
        Ok(())
    }
}

fn cartesian(domains: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut p = prefix.clone();
                p.push(v.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
