use std::fmt;

use super::{ActionDescription, CausalLaw, FluentAtom};

fn action_name(d: &ActionDescription, a: usize) -> String {
    d.actions.get(a).cloned().unwrap_or_else(|| format!("#{a}"))
}

fn atom_name(d: &ActionDescription, a: FluentAtom) -> String {
    match d.fluents.get(a.fluent) {
        Some(decl) => match decl.domain.get(a.value) {
            Some(v) => format!("{}={}", decl.name, v),
            None => format!("{}=#{}", decl.name, a.value),
        },
        None => format!("#{}=#{}", a.fluent, a.value),
    }
}

pub(super) fn law_to_string(d: &ActionDescription, law: &CausalLaw) -> String {
    let body = |s: String| {
        let listed: Vec<String> = law.body().iter().map(|a| atom_name(d, *a)).collect();
        if listed.is_empty() {
            s
        } else {
            format!("{s} if {}", listed.join(", "))
        }
    };
    match law {
        CausalLaw::Static { head, .. } => body(format!("static {}", atom_name(d, *head))),
        CausalLaw::Dynamic { action, head, .. } => {
            body(format!("dynamic {} causes {}", action_name(d, *action), atom_name(d, *head)))
        }
        CausalLaw::Nonexecutable { action, .. } => body(format!("nonexecutable {}", action_name(d, *action))),
        CausalLaw::Inertial { fluent } => match d.fluents.get(*fluent) {
            Some(f) => format!("inertial {}", f.name),
            None => format!("inertial #{fluent}"),
        },
        CausalLaw::Default { head, .. } => body(format!("default {}", atom_name(d, *head))),
    }
}

/// Writes a grounded description back in source form. Every non-boolean
/// fluent gets its own sort named `<fluent>_values`.
pub(super) fn write_description(d: &ActionDescription, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for decl in d.fluents.iter().filter(|decl| !decl.is_bool()) {
        writeln!(f, "sort {}_values = {{{}}}", decl.name, decl.domain.join(", "))?;
    }
    for decl in &d.fluents {
        if decl.is_bool() {
            writeln!(f, "fluent {} : bool", decl.name)?;
        } else {
            writeln!(f, "fluent {} : {}_values", decl.name, decl.name)?;
        }
    }
    for a in &d.actions {
        writeln!(f, "action {a}")?;
    }
    for law in &d.laws {
        writeln!(f, "{}", law_to_string(d, law))?;
    }
    Ok(())
}
