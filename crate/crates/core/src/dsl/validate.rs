//! Definitional checks on an elaborated theory.

use std::collections::{BTreeMap, BTreeSet};

use super::theory::*;
use crate::eval::{evaluate, InitialModel};
use crate::logic::{is_uniform_in, Formula, Symbol, Term};

/// Temporal fluents mentioned in a formula.
pub fn temporal_mentions(f: &Formula) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    f.visit_terms(&mut |t| {
        t.visit(&mut |x| {
            if let Term::Temporal(n, ..) = x {
                out.insert(n.clone());
            }
        })
    });
    out
}

/// The ≻ relation: `f ≻ g` iff `g` occurs in a change axiom for `f`.
pub fn dependency_graph(th: &Theory) -> BTreeMap<Symbol, BTreeSet<Symbol>> {
    let mut g: BTreeMap<Symbol, BTreeSet<Symbol>> = BTreeMap::new();
    for f in th.temporal_fluents() {
        g.entry(f.name.clone()).or_default();
    }
    for t in &th.tcas {
        let e = g.entry(t.fluent.clone()).or_default();
        e.extend(temporal_mentions(&t.context));
        e.extend(temporal_mentions(&t.law));
    }
    g
}

/// A cycle of the ≻ relation, first element repeated at the end.
pub fn stratification_cycle(th: &Theory) -> Option<Vec<Symbol>> {
    let g = dependency_graph(th);
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark: BTreeMap<&Symbol, Mark> = g.keys().map(|k| (k, Mark::New)).collect();
    fn dfs<'g>(
        v: &'g Symbol,
        g: &'g BTreeMap<Symbol, BTreeSet<Symbol>>,
        mark: &mut BTreeMap<&'g Symbol, Mark>,
        path: &mut Vec<&'g Symbol>,
    ) -> Option<Vec<Symbol>> {
        mark.insert(v, Mark::Active);
        path.push(v);
        for w in g.get(v).into_iter().flatten() {
            match mark.get(w).copied().unwrap_or(Mark::Done) {
                Mark::Active => {
                    let i = path.iter().position(|p| *p == w).unwrap();
                    let mut cyc: Vec<Symbol> = path[i..].iter().map(|s| (*s).clone()).collect();
                    cyc.push(w.clone());
                    return Some(cyc);
                }
                Mark::New => {
                    if let Some(c) = dfs(w, g, mark, path) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        path.pop();
        mark.insert(v, Mark::Done);
        None
    }
    for v in g.keys() {
        if mark[v] == Mark::New {
            if let Some(c) = dfs(v, &g, &mut mark, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}

fn uniform(f: &Formula, s: &crate::logic::Var) -> bool {
    is_uniform_in(f, &Term::var(s))
}

/// Structural conditions on the axioms; no model is needed.
pub fn check_axioms(th: &Theory) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for a in &th.actions {
        if th.poss_for(&a.name).is_none() {
            out.push(Diagnostic::error(
                "missing-poss",
                format!("action `{}` has no precondition axiom", a.name),
                None,
            ));
        }
    }
    for f in &th.fluents {
        match f.kind {
            FluentKind::Rel | FluentKind::Fun(_) if th.ssa_for(&f.name).is_none() => {
                out.push(Diagnostic::error(
                    "missing-ssa",
                    format!("fluent `{}` has no successor state axiom", f.name),
                    None,
                ));
            }
            FluentKind::Temporal if th.init_ssa_for(&init_name(&f.name)).is_none() => {
                out.push(Diagnostic::error(
                    "missing-init-ssa",
                    format!(
                        "temporal fluent `{}` needs an axiom for `{}` in the init-ssa section",
                        f.name,
                        init_name(&f.name)
                    ),
                    None,
                ));
            }
            _ => {}
        }
    }
    for p in &th.poss {
        if !uniform(&p.rhs, &p.sit) {
            out.push(Diagnostic::error(
                "non-uniform",
                format!(
                    "precondition of `{}` must be uniform in `{}`",
                    p.action, p.sit.name
                ),
                Some(p.span),
            ));
        }
    }
    for a in &th.ssas {
        if !uniform(&a.rhs, &a.sit) {
            out.push(Diagnostic::error(
                "non-uniform",
                format!(
                    "successor state axiom of `{}` must be uniform in `{}`",
                    a.fluent, a.sit.name
                ),
                Some(a.span),
            ));
        }
    }
    for d in &th.init_ssas {
        let s = Term::var(&d.sit);
        for c in &d.cases {
            let value_ok = !c
                .value
                .any(&mut |t| t.is_situational() && !term_uniform(t, &s));
            if !uniform(&c.guard, &d.sit) || !value_ok {
                out.push(Diagnostic::error(
                    "non-uniform",
                    format!(
                        "effect case for `{}` must be uniform in `{}`",
                        d.fluent, d.sit.name
                    ),
                    Some(c.span),
                ));
            }
        }
    }
    if let Some(cyc) = stratification_cycle(th) {
        let chain: Vec<&str> = cyc.iter().map(|s| s.as_str()).collect();
        out.push(Diagnostic::error(
            "stratification",
            format!("SEA stratification cycle {}", chain.join(" ≻ ")),
            None,
        ));
    }
    out
}

/// Whether every situation argument inside `t` is exactly `s`.
fn term_uniform(t: &Term, s: &Term) -> bool {
    is_uniform_in(&Formula::Eq(t.clone(), t.clone()), s)
}

/// All checks, including the initial model and the state constraints.
pub fn validate_theory(th: &Theory) -> Vec<Diagnostic> {
    let mut out = check_axioms(th);
    let (model, diags) = InitialModel::build(th);
    let model_ok = diags.is_empty();
    out.extend(diags);
    if model_ok {
        out.extend(check_constraints(th, &model));
    }
    out
}

pub fn check_constraints(th: &Theory, model: &InitialModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for c in &th.constraints {
        match evaluate(&c.formula, model) {
            Ok(true) => {}
            Ok(false) => {
                let witness = match violating_instance(&c.formula, model) {
                    Some(inst) => format!("; fails for {inst}"),
                    None => String::new(),
                };
                out.push(Diagnostic::error(
                    "constraint-violated",
                    format!(
                        "initial facts violate the state constraint {}{witness}",
                        c.formula
                    ),
                    Some(c.span),
                ))
            }
            Err(e) => out.push(Diagnostic::warning(
                "constraint-unchecked",
                format!("cannot evaluate state constraint: {e}"),
                Some(c.span),
            )),
        }
    }
    out
}

/// For `forall x.. body`, the first object instance falsifying `body`.
fn violating_instance(f: &Formula, model: &InitialModel) -> Option<String> {
    let mut vars = Vec::new();
    let mut body = f;
    while let Formula::Forall(v, b) = body {
        if !v.sort.is_object() {
            break;
        }
        vars.push(v.clone());
        body = b;
    }
    if vars.is_empty() {
        return None;
    }
    let sorts: Vec<_> = vars.iter().map(|v| v.sort.clone()).collect();
    let mut tuples = vec![vec![]];
    for s in &sorts {
        let dom = crate::logic::GroundFacts::domain(model, s)?;
        tuples = tuples
            .into_iter()
            .flat_map(|p: Vec<Term>| {
                dom.iter()
                    .map(move |o| [p.clone(), vec![o.clone()]].concat())
            })
            .collect();
    }
    for t in tuples {
        let s: crate::logic::Subst = vars.iter().cloned().zip(t.iter().cloned()).collect();
        let inst = crate::logic::subst_formula(body, &s);
        if evaluate(&inst, model) == Ok(false) {
            let binding: Vec<String> = vars
                .iter()
                .zip(&t)
                .map(|(v, o)| format!("{} = {o}", v.name))
                .collect();
            return Some(binding.join(", "));
        }
    }
    None
}
