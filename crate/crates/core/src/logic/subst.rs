//! Capture-avoiding substitution, fresh names and alpha-normalization.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::formula::Formula;
use super::symbol::Symbol;
use super::term::{Sort, Term, Var};

pub type Subst = BTreeMap<Var, Term>;

#[derive(Debug, Error, PartialEq)]
pub enum SubstError {
    #[error("sort mismatch: cannot substitute {term} (sort {found}) for variable {var} of sort {expected}")]
    SortMismatch {
        var: Symbol,
        expected: Sort,
        term: String,
        found: String,
    },
}

/// Returns `base`, or `base` followed by primes, avoiding `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Symbol>) -> Symbol {
    let mut name = base.to_string();
    while avoid.contains(name.as_str()) {
        name.push('\'');
    }
    Symbol::from(name)
}

pub fn fresh_var(v: &Var, avoid: &BTreeSet<Symbol>) -> Var {
    v.with_name(fresh_name(&v.name, avoid))
}

/// Sort of a term when it can be read off without a signature.
pub fn known_sort(t: &Term) -> Option<Sort> {
    match t {
        Term::Var(v) => Some(v.sort.clone()),
        Term::Num(_) | Term::Start(_) | Term::Time(_) | Term::Arith(..) | Term::Temporal(..) => {
            Some(Sort::Real)
        }
        Term::Action { .. } => Some(Sort::Action),
        Term::S0 | Term::Do(..) => Some(Sort::Situation),
        Term::Obj(_) | Term::Static(..) | Term::Fluent(..) => None,
    }
}

/// `phi` with every free occurrence of `var` replaced by `t`.
pub fn substitute(phi: &Formula, var: &Var, t: &Term) -> Result<Formula, SubstError> {
    let mismatch = match (known_sort(t), t) {
        (Some(s), _) => s != var.sort,
        (None, Term::Obj(_)) => !var.sort.is_object(),
        _ => false,
    };
    if mismatch {
        return Err(SubstError::SortMismatch {
            var: var.name.clone(),
            expected: var.sort.clone(),
            term: t.to_string(),
            found: known_sort(t)
                .map(|s| s.to_string())
                .unwrap_or_else(|| "object".into()),
        });
    }
    let mut s = Subst::new();
    s.insert(var.clone(), t.clone());
    Ok(subst_formula(phi, &s))
}

pub fn subst_term(t: &Term, s: &Subst) -> Term {
    if s.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.map_children(|c| subst_term(c, s)),
    }
}

/// Simultaneous capture-avoiding substitution.
pub fn subst_formula(f: &Formula, s: &Subst) -> Formula {
    if s.is_empty() {
        return f.clone();
    }
    match f {
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let mut inner = s.clone();
            inner.remove(v);
            let body_free = body.free_vars();
            inner.retain(|k, _| body_free.contains(k));
            if inner.is_empty() {
                return f.clone();
            }
            let mut range_names = BTreeSet::new();
            for t in inner.values() {
                for w in t.free_vars() {
                    range_names.insert(w.name);
                }
            }
            let (binder, new_body) = if range_names.contains(&v.name) {
                let mut avoid = body.all_names();
                avoid.extend(range_names);
                avoid.extend(inner.keys().map(|k| k.name.clone()));
                let nv = fresh_var(v, &avoid);
                inner.insert(v.clone(), Term::Var(nv.clone()));
                (nv, subst_formula(body, &inner))
            } else {
                (v.clone(), subst_formula(body, &inner))
            };
            match f {
                Formula::Exists(..) => Formula::exists(binder, new_body),
                _ => Formula::forall(binder, new_body),
            }
        }
        atom if atom.is_atom() => atom.map_atom_terms(|t| subst_term(t, s)),
        other => other.map_children(|c| subst_formula(c, s)),
    }
}

/// Replaces every occurrence of the term `from` by `to` inside a term.
pub fn replace_in_term(t: &Term, from: &Term, to: &Term) -> Term {
    if t == from {
        return to.clone();
    }
    t.map_children(|c| replace_in_term(c, from, to))
}

/// `atom` with occurrences of `from` replaced by `to`; atoms bind nothing so
/// no capture can occur.
pub fn replace_in_atom(atom: &Formula, from: &Term, to: &Term) -> Formula {
    atom.map_atom_terms(|t| replace_in_term(t, from, to))
}

/// Renames every bound variable to a canonical name determined by binding
/// depth, so alpha-equivalent formulas become structurally equal.
pub fn alpha_normalize(f: &Formula) -> Formula {
    fn go(f: &Formula, depth: usize) -> Formula {
        match f {
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let nv = v.with_name(Symbol::from(format!("#{depth}")));
                let mut s = Subst::new();
                s.insert(v.clone(), Term::Var(nv.clone()));
                let renamed = subst_formula(body, &s);
                let b = go(&renamed, depth + 1);
                match f {
                    Formula::Exists(..) => Formula::exists(nv, b),
                    _ => Formula::forall(nv, b),
                }
            }
            other => other.map_children(|c| go(c, depth)),
        }
    }
    go(f, 0)
}

pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha_normalize(a) == alpha_normalize(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Var {
        Var::real("x")
    }
    fn y() -> Var {
        Var::real("y")
    }

    #[test]
    fn direct_replacement() {
        let phi = Formula::eq(Term::var(&x()), Term::int(5));
        let out = substitute(&phi, &x(), &Term::int(7)).unwrap();
        assert_eq!(out, Formula::eq(Term::int(7), Term::int(5)));
    }

    #[test]
    fn capture_avoidance_renames_binder() {
        // substitute(∃x(x=y), y, x) → ∃x'(x'=x)
        let phi = Formula::exists(x(), Formula::eq(Term::var(&x()), Term::var(&y())));
        let out = substitute(&phi, &y(), &Term::var(&x())).unwrap();
        let xp = Var::real("x'");
        assert_eq!(
            out,
            Formula::exists(xp.clone(), Formula::eq(Term::var(&xp), Term::var(&x())))
        );
    }

    #[test]
    fn temporal_argument_replacement() {
        let t = Var::real("t");
        let s = Var::sit("s");
        let lane = Sort::object("lane");
        let _ = lane;
        let que = Term::temporal(
            "que",
            vec![Term::obj("I"), Term::obj("in1")],
            Term::var(&t),
            Term::var(&s),
        );
        let phi = Formula::eq(que, Term::var(&y()));
        let out = substitute(&phi, &t, &Term::int(3)).unwrap();
        let expect = Formula::eq(
            Term::temporal(
                "que",
                vec![Term::obj("I"), Term::obj("in1")],
                Term::int(3),
                Term::var(&s),
            ),
            Term::var(&y()),
        );
        assert_eq!(out, expect);
    }

    #[test]
    fn sort_mismatch_is_rejected() {
        let phi = Formula::eq(Term::var(&x()), Term::int(5));
        let err = substitute(&phi, &x(), &Term::S0).unwrap_err();
        assert!(matches!(err, SubstError::SortMismatch { .. }));
        let a = Var::action("a");
        assert!(substitute(&phi, &a, &Term::obj("I")).is_err());
    }

    #[test]
    fn bound_occurrences_untouched() {
        let phi = Formula::exists(x(), Formula::lt(Term::var(&x()), Term::int(1)));
        assert_eq!(substitute(&phi, &x(), &Term::int(0)).unwrap(), phi);
    }

    #[test]
    fn alpha_equivalence() {
        let a = Formula::exists(x(), Formula::lt(Term::var(&x()), Term::var(&y())));
        let z = Var::real("z");
        let b = Formula::exists(z.clone(), Formula::lt(Term::var(&z), Term::var(&y())));
        assert!(alpha_eq(&a, &b));
        let c = Formula::exists(z.clone(), Formula::lt(Term::var(&y()), Term::var(&z)));
        assert!(!alpha_eq(&a, &c));
    }
}
