//! Executability of a ground narrative.

use std::collections::BTreeSet;

use super::evaluate::{evaluate, ground};
use super::threshold::solve_threshold;
use crate::dsl::theory::Diagnostic;
use crate::logic::subst::fresh_var;
use crate::logic::{format_rat, Formula, Rat, Term, Var};
use crate::regression::Regressor;
use crate::sea::Compiled;

#[derive(Clone, Debug, PartialEq)]
pub struct Executability {
    pub executable: bool,
    pub diagnostics: Vec<Diagnostic>,
}

fn time_of(a: &Term) -> Option<&Rat> {
    match a {
        Term::Action { time, .. } => time.as_num(),
        _ => None,
    }
}

/// Checks that action times do not decrease and that every action is
/// possible in the situation it is performed in. A natural action whose
/// precondition becomes true strictly before the next action, without
/// occurring there, is reported as a warning.
pub fn check_executable(narrative: &[Term], c: &Compiled) -> Executability {
    let mut diags = Vec::new();
    let regressor = Regressor::new(c);
    let mut sit = Term::S0;
    let mut start = c.model.start.clone();
    let mut sits = vec![Term::S0];
    for (k, a) in narrative.iter().enumerate() {
        let Some(t) = time_of(a) else {
            diags.push(Diagnostic::error(
                "not-executable",
                format!("time of `{a}` is not a number"),
                None,
            ));
            break;
        };
        if t < &start {
            diags.push(Diagnostic::error(
                "not-executable",
                format!(
                    "action {} `{a}` occurs at {} before the start {} of its situation",
                    k + 1,
                    format_rat(t),
                    format_rat(&start)
                ),
                None,
            ));
            break;
        }
        let poss = Formula::Poss(a.clone(), sit.clone());
        match regressor
            .regress(&poss)
            .map_err(|e| e.to_string())
            .and_then(|r| evaluate(&r.formula, &c.model).map_err(|e| e.to_string()))
        {
            Ok(true) => {}
            Ok(false) => {
                diags.push(Diagnostic::error(
                    "not-executable",
                    format!("action {} `{a}` is not possible in {sit}", k + 1),
                    None,
                ));
                break;
            }
            Err(e) => {
                diags.push(Diagnostic::error(
                    "not-executable",
                    format!("cannot decide `{poss}`: {e}"),
                    None,
                ));
                break;
            }
        }
        start = t.clone();
        sit = Term::do_(a.clone(), sit);
        sits.push(sit.clone());
    }
    let executable = !diags.iter().any(Diagnostic::is_error);
    if executable {
        diags.extend(natural_warnings(narrative, &sits, c, &regressor));
    }
    Executability {
        executable,
        diagnostics: diags,
    }
}

fn natural_warnings(
    narrative: &[Term],
    sits: &[Term],
    c: &Compiled,
    regressor: &Regressor,
) -> Vec<Diagnostic> {
    let th = &c.theory;
    let names: BTreeSet<_> = crate::dsl::elaborate::declared_names(th);
    let t = fresh_var(&Var::real("t"), &names);
    let mut out = Vec::new();
    for decl in th.actions.iter().filter(|d| d.natural) {
        for args in th.groundings(&decl.params).unwrap_or_default() {
            let act = Term::Action {
                functor: decl.name.clone(),
                args: args.clone(),
                time: Box::new(Term::var(&t)),
            };
            for (j, next) in narrative.iter().enumerate() {
                let start = if j == 0 {
                    c.model.start.clone()
                } else {
                    time_of(&narrative[j - 1]).cloned().unwrap()
                };
                let until = time_of(next).cloned().unwrap();
                let poss = Formula::Poss(act.clone(), sits[j].clone());
                let trigger = regressor.regress(&poss).ok().and_then(|r| {
                    solve_threshold(&ground(&r.formula, &c.model), &t, &start, &until)
                        .ok()
                        .flatten()
                });
                let Some(trigger) = trigger else { continue };
                if trigger.value >= until {
                    continue;
                }
                let at = Term::Action {
                    functor: decl.name.clone(),
                    args: args.clone(),
                    time: Box::new(Term::Num(trigger.value.clone())),
                };
                // The action just occurred and its precondition still holds.
                if j > 0 && narrative[j - 1] == at {
                    continue;
                }
                out.push(Diagnostic::warning(
                    "natural-action",
                    format!(
                        "natural action `{at}` can occur in {} before `{next}` but is not in the narrative",
                        sits[j]
                    ),
                    None,
                ));
            }
        }
    }
    out
}
