use std::collections::BTreeSet;

use super::disjoin::sat_somewhere;
use super::{Branch, Head, InitSsa, Sea};
use crate::dsl::theory::{Diagnostic, EffectCase, InitSsaDecl, Theory};
use crate::eval::Oracle;
use crate::logic::subst::{fresh_name, fresh_var};
use crate::logic::{subst_formula, subst_term, Formula, Sort, Subst, Symbol, Term, Var};

/// The evolution axiom for disjoint branches. The frame branch is omitted
/// only when some context holds in every state allowed by the constraints.
pub fn derive_sea(head: &Head, init: &str, branches: Vec<Branch>, oracle: &Oracle) -> Sea {
    let mut sea = Sea {
        fluent: head.fluent.clone(),
        init: Symbol::from(init),
        params: head.params.clone(),
        time: head.time.clone(),
        value: head.value.clone(),
        sit: head.sit.clone(),
        branches,
        frame: true,
    };
    if !sea.branches.is_empty() {
        let uncovered = Formula::not(sea.psi());
        sea.frame = !matches!(sat_somewhere(head, &uncovered, oracle), Ok(None));
    }
    sea
}

/// Renames the fresh variables of `c` away from `avoid`.
fn rename_case(c: &EffectCase, avoid: &BTreeSet<Symbol>) -> EffectCase {
    let mut s = Subst::new();
    let mut fresh = Vec::new();
    let mut taken = avoid.clone();
    for v in &c.fresh {
        let nv = fresh_var(v, &taken);
        taken.insert(nv.name.clone());
        s.insert(v.clone(), Term::var(&nv));
        fresh.push(nv);
    }
    EffectCase {
        action: c.action.clone(),
        args: c.args.iter().map(|a| subst_term(a, &s)).collect(),
        time: subst_term(&c.time, &s),
        fresh,
        guard: subst_formula(&c.guard, &s),
        value: subst_term(&c.value, &s),
        span: c.span,
    }
}

/// The init axiom with its value variable, reporting effect cases that can
/// fire together with different values.
pub fn derive_init_ssa(
    decl: &InitSsaDecl,
    th: &Theory,
    oracle: &Oracle,
) -> (InitSsa, Vec<Diagnostic>) {
    let mut avoid: BTreeSet<Symbol> = crate::dsl::elaborate::declared_names(th);
    avoid.extend(decl.params.iter().map(|p| p.name.clone()));
    avoid.insert(decl.action.name.clone());
    avoid.insert(decl.sit.name.clone());
    for c in &decl.cases {
        avoid.extend(c.fresh.iter().map(|v| v.name.clone()));
        avoid.extend(c.guard.all_names());
    }
    let value = Var::new(&fresh_name("y", &avoid), Sort::Real);
    let ssa = InitSsa {
        fluent: decl.fluent.clone(),
        of: decl.of.clone(),
        params: decl.params.clone(),
        action: decl.action.clone(),
        sit: decl.sit.clone(),
        value,
        cases: decl.cases.clone(),
    };

    let mut diags = Vec::new();
    let sorts: Vec<Sort> = decl.params.iter().map(|p| p.sort.clone()).collect();
    let tuples = th
        .groundings(&sorts)
        .unwrap_or_else(|| vec![decl.params.iter().map(Term::var).collect()]);
    let sit = Term::var(&decl.sit);
    for (i, a) in decl.cases.iter().enumerate() {
        for b in decl
            .cases
            .iter()
            .skip(i + 1)
            .filter(|b| b.action == a.action)
        {
            let mut names = avoid.clone();
            names.extend(a.fresh.iter().map(|v| v.name.clone()));
            let b = rename_case(b, &names);
            let f = Formula::and(vec![
                Formula::Eq(a.action_term(), b.action_term()),
                a.guard.clone(),
                b.guard.clone(),
                Formula::ne(a.value.clone(), b.value.clone()),
            ]);
            for t in &tuples {
                let g: Subst = decl.params.iter().cloned().zip(t.iter().cloned()).collect();
                if let Ok(Some(w)) = oracle.witness(&subst_formula(&f, &g), Some(&sit)) {
                    diags.push(Diagnostic::error(
                        "effect-overlap",
                        format!(
                            "effect cases `{}` and `{}` of `{}` can both apply with different values: {w}",
                            a.action_term(),
                            b.action_term(),
                            decl.fluent
                        ),
                        Some(b.span),
                    ));
                    break;
                }
            }
        }
    }
    (ssa, diags)
}
