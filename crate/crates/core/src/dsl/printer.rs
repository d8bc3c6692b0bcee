//! Renders a [`Theory`] back into the `.tbat` syntax.

use std::fmt::Write;

use super::theory::*;
use crate::logic::{format_rat, Formula, Term};

fn list<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn params(xs: &[crate::logic::Sort]) -> String {
    if xs.is_empty() {
        String::new()
    } else {
        format!("({})", list(xs))
    }
}

/// Right-hand side of `<->`, parenthesized when it would otherwise bind
/// differently.
fn rhs(f: &Formula) -> String {
    match f {
        Formula::Iff(..) => format!("({f})"),
        _ => f.to_string(),
    }
}

fn head(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(", "))
    }
}

pub fn print_theory(th: &Theory) -> String {
    let mut out = String::new();
    if !th.sorts.is_empty() {
        out.push_str("sorts {\n");
        for s in &th.sorts {
            let _ = writeln!(out, "  {} = {{ {} }};", s.name, list(&s.objects));
        }
        out.push_str("}\n\n");
    }
    if !th.statics.is_empty() {
        out.push_str("statics {\n");
        for s in &th.statics {
            match (&s.def, &s.kind) {
                (None, StaticKind::Pred) => {
                    let _ = writeln!(out, "  pred {}{};", s.name, params(&s.params));
                }
                (None, StaticKind::Fun(r)) => {
                    let _ = writeln!(out, "  fun {}{}: {r};", s.name, params(&s.params));
                }
                (Some(d), kind) => {
                    let ps: Vec<String> = d
                        .params
                        .iter()
                        .map(|v| format!("{}: {}", v.name, v.sort))
                        .collect();
                    let ps = if ps.is_empty() {
                        String::new()
                    } else {
                        format!("({})", ps.join(", "))
                    };
                    match (kind, &d.body) {
                        (StaticKind::Pred, DefBody::Formula(f)) => {
                            let _ = writeln!(out, "  def pred {}{ps} := {f};", s.name);
                        }
                        (StaticKind::Fun(r), DefBody::Term(t)) => {
                            let _ = writeln!(out, "  def fun {}{ps}: {r} := {t};", s.name);
                        }
                        _ => unreachable!("definition body does not match its kind"),
                    }
                }
            }
        }
        out.push_str("}\n\n");
    }
    if !th.actions.is_empty() {
        out.push_str("actions {\n");
        for a in &th.actions {
            let nat = if a.natural { "natural " } else { "" };
            let _ = writeln!(out, "  {nat}{}{};", a.name, params(&a.params));
        }
        out.push_str("}\n\n");
    }
    let visible: Vec<&FluentDecl> = th
        .fluents
        .iter()
        .filter(|f| !matches!(f.kind, FluentKind::Init { .. }))
        .collect();
    if !visible.is_empty() {
        out.push_str("fluents {\n");
        for f in visible {
            let p = params(&f.params);
            let _ = match &f.kind {
                FluentKind::Rel => writeln!(out, "  rel {}{p};", f.name),
                FluentKind::Fun(s) => writeln!(out, "  fun {}{p}: {s};", f.name),
                FluentKind::Temporal => writeln!(out, "  temporal {}{p};", f.name),
                FluentKind::Init { .. } => unreachable!(),
            };
        }
        out.push_str("}\n\n");
    }
    if !th.poss.is_empty() {
        out.push_str("poss {\n");
        for p in &th.poss {
            let _ = writeln!(
                out,
                "  Poss({}, {}) <-> {};",
                p.action_term(),
                p.sit.name,
                rhs(&p.rhs)
            );
        }
        out.push_str("}\n\n");
    }
    if !th.ssas.is_empty() {
        out.push_str("ssa {\n");
        for s in &th.ssas {
            let mut args: Vec<String> = s.params.iter().map(|v| v.name.to_string()).collect();
            args.push(format!("do({}, {})", s.action.name, s.sit.name));
            let h = head(&s.fluent, &args);
            let h = match &s.value {
                Some(y) => format!("{h} = {}", y.name),
                None => h,
            };
            let _ = writeln!(out, "  {h} <-> {};", rhs(&s.rhs));
        }
        out.push_str("}\n\n");
    }
    if !th.init_ssas.is_empty() {
        out.push_str("init-ssa {\n");
        for d in &th.init_ssas {
            let mut args: Vec<String> = d.params.iter().map(|v| v.name.to_string()).collect();
            args.push(format!("do({}, {})", d.action.name, d.sit.name));
            let _ = writeln!(out, "  {} {{", head(&d.fluent, &args));
            for c in &d.cases {
                let guard = if c.guard.is_true() {
                    String::new()
                } else {
                    format!(" if {}", c.guard)
                };
                let _ = writeln!(out, "    {}{guard} => {};", c.action_term(), c.value);
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n\n");
    }
    if !th.tcas.is_empty() {
        out.push_str("tca {\n");
        for t in &th.tcas {
            let mut args: Vec<String> = t.params.iter().map(|v| v.name.to_string()).collect();
            args.push(t.time.name.to_string());
            args.push(t.sit.name.to_string());
            let _ = writeln!(
                out,
                "  {} = {}\n    when {}\n    then {};",
                head(&t.fluent, &args),
                t.value.name,
                t.context,
                t.law
            );
        }
        out.push_str("}\n\n");
    }
    if th.init.start.is_some() || !th.init.facts.is_empty() {
        out.push_str("init {\n");
        if let Some(r) = &th.init.start {
            let _ = writeln!(out, "  start = {};", Term::Num(r.clone()));
        }
        for f in &th.init.facts {
            let args: Vec<String> = f
                .args
                .iter()
                .map(|a| match a {
                    FactArg::Term(t) => t.to_string(),
                    FactArg::Any => "_".to_string(),
                })
                .collect();
            let h = head(&f.symbol, &args);
            let _ = match &f.value {
                FactValue::Holds(true) => writeln!(out, "  {h};"),
                FactValue::Holds(false) => writeln!(out, "  !{h};"),
                FactValue::Is(v) => writeln!(out, "  {h} = {v};"),
            };
        }
        out.push_str("}\n\n");
    }
    if !th.constraints.is_empty() {
        out.push_str("constraints {\n");
        for c in &th.constraints {
            let _ = writeln!(out, "  {};", c.formula);
        }
        out.push_str("}\n");
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}

/// `p/q` rendering used in human output.
pub fn rat(r: &crate::logic::Rat) -> String {
    format_rat(r)
}
