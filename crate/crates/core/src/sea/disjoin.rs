//! Making the contexts of a fluent's change axioms pairwise exclusive.

use std::collections::BTreeSet;

use super::{describe_grounding, groundings, Branch, Head};
use crate::arith::sat::Witness;
use crate::arith::QeError;
use crate::dsl::theory::Diagnostic;
use crate::eval::Oracle;
use crate::logic::subst::fresh_var;
use crate::logic::{simplify, subst_formula, Formula, Subst, Term, Var};

const MAX_SPLITS: usize = 512;

/// `⋁ (context ∧ law)`; false for an empty set.
pub fn build_pnf(branches: &[Branch]) -> Formula {
    Formula::or(
        branches
            .iter()
            .map(|b| Formula::and(vec![b.context.clone(), b.law.clone()]))
            .collect(),
    )
}

/// First grounding (with a witness) at which `f` is satisfiable.
pub(crate) fn sat_somewhere(
    head: &Head,
    f: &Formula,
    oracle: &Oracle,
) -> Result<Option<(Vec<Term>, Witness)>, QeError> {
    let sit = Term::var(&head.sit);
    for g in groundings(oracle.theory, head) {
        let inst = subst_formula(f, &head.grounding(&g));
        if let Some(w) = oracle.witness(&inst, Some(&sit))? {
            return Ok(Some((g, w)));
        }
    }
    Ok(None)
}

/// A copy of the value variable not occurring in `fs`.
pub(crate) fn second_value(head: &Head, fs: &[&Formula]) -> Var {
    let mut avoid: BTreeSet<_> = fs.iter().flat_map(|f| f.all_names()).collect();
    avoid.insert(head.value.name.clone());
    fresh_var(&head.value, &avoid)
}

/// Splits overlapping contexts `γa, γb` into `γa ∧ ¬γb`, `¬γa ∧ γb` and
/// `γa ∧ γb`, the last keeping `a`'s law, until no two contexts can hold
/// together under the state constraints. Pieces that can never hold are
/// dropped. Overlaps on which the two laws define different values are
/// reported as errors.
pub fn disjoin_contexts(
    head: &Head,
    branches: Vec<Branch>,
    oracle: &Oracle,
) -> (Vec<Branch>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut out = branches;
    let mut disjoint: BTreeSet<(Formula, Formula)> = BTreeSet::new();
    let mut splits = 0;
    'scan: loop {
        for i in 0..out.len() {
            for j in i + 1..out.len() {
                let key = (out[i].context.clone(), out[j].context.clone());
                if disjoint.contains(&key) {
                    continue;
                }
                let both = Formula::and(vec![out[i].context.clone(), out[j].context.clone()]);
                match sat_somewhere(head, &both, oracle) {
                    Ok(None) => {
                        disjoint.insert(key);
                    }
                    Err(e) => {
                        diags.push(Diagnostic::warning(
                            "overlap-undecided",
                            format!(
                                "cannot decide whether contexts `{}` and `{}` of `{}` overlap ({e}); assert their disjointness with a state constraint",
                                out[i].context, out[j].context, head.fluent
                            ),
                            None,
                        ));
                        disjoint.insert(key);
                    }
                    Ok(Some(_)) => {
                        if splits >= MAX_SPLITS {
                            diags.push(Diagnostic::error(
                                "overlap-undecided",
                                format!(
                                    "contexts of `{}` still overlap after {MAX_SPLITS} splits",
                                    head.fluent
                                ),
                                None,
                            ));
                            return (out, diags);
                        }
                        splits += 1;
                        if let Some(d) = conflict(head, &out[i], &out[j], oracle) {
                            diags.push(d);
                        }
                        let (a, b) = (out[i].clone(), out[j].clone());
                        let not = |f: &Formula| Formula::not(f.clone());
                        let pieces = [
                            Branch {
                                context: Formula::and(vec![a.context.clone(), not(&b.context)]),
                                law: a.law.clone(),
                            },
                            Branch {
                                context: Formula::and(vec![not(&a.context), b.context.clone()]),
                                law: b.law.clone(),
                            },
                            Branch {
                                context: Formula::and(vec![a.context.clone(), b.context.clone()]),
                                law: a.law.clone(),
                            },
                        ];
                        out.remove(j);
                        out.remove(i);
                        let mut at = i;
                        for p in pieces {
                            let p = Branch {
                                context: simplify(&p.context),
                                law: p.law,
                            };
                            // Pieces that never hold carry no information.
                            if !matches!(sat_somewhere(head, &p.context, oracle), Ok(None)) {
                                out.insert(at, p);
                                at += 1;
                            }
                        }
                        continue 'scan;
                    }
                }
            }
        }
        break;
    }
    (out, diags)
}

/// An error when both laws apply on the overlap and can disagree.
fn conflict(head: &Head, a: &Branch, b: &Branch, oracle: &Oracle) -> Option<Diagnostic> {
    let y2 = second_value(head, &[&a.law, &b.law, &a.context, &b.context]);
    let mut s = Subst::new();
    s.insert(head.value.clone(), Term::var(&y2));
    let f = Formula::and(vec![
        a.context.clone(),
        b.context.clone(),
        a.law.clone(),
        subst_formula(&b.law, &s),
        Formula::ne(Term::var(&head.value), Term::var(&y2)),
    ]);
    match sat_somewhere(head, &f, oracle) {
        Ok(Some((g, w))) => Some(Diagnostic::error(
            "overlap-conflict",
            format!(
                "change axioms of `{}` with contexts `{}` and `{}` both apply and disagree{}: {w}",
                head.fluent,
                a.context,
                b.context,
                describe_grounding(head, &g)
            ),
            None,
        )),
        _ => None,
    }
}
