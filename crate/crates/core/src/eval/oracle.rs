//! Satisfiability relative to a theory: statics and definitions resolved,
//! object quantifiers expanded, state constraints added where relevant.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use crate::arith::sat::{self, Witness};
use crate::arith::{Lra, QeError};
use crate::dsl::theory::{FluentKind, StaticKind, Theory};
use crate::eval::InitialModel;
use crate::logic::subst::replace_in_atom;
use crate::logic::{simplify_with, Formula, SimplifyContext, Sort, Symbol, Term, Var};

pub struct Oracle<'a> {
    pub theory: &'a Theory,
    pub model: &'a InitialModel,
    lra: Lra,
    instances: Mutex<BTreeMap<Term, Vec<Formula>>>,
}

/// `f` with every occurrence of the term `from` replaced by `to`.
pub fn replace(f: &Formula, from: &Term, to: &Term) -> Formula {
    if f.is_atom() {
        return replace_in_atom(f, from, to);
    }
    f.map_children(|c| replace(c, from, to))
}

/// Replaces `S0` by `sit` everywhere.
pub fn at_situation(f: &Formula, sit: &Term) -> Formula {
    replace(f, &Term::S0, sit)
}

/// Fluent terms and relational atoms a formula depends on, keyed as terms.
pub fn state_keys(f: &Formula) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    f.visit_atoms(&mut |a| {
        if let Formula::Rel(n, args, s) = a {
            out.insert(Term::Fluent(n.clone(), args.clone(), Box::new(s.clone())));
        }
    });
    f.visit_terms(&mut |t| {
        t.visit(&mut |x| {
            if matches!(x, Term::Fluent(..) | Term::Temporal(..)) {
                out.insert(x.clone());
            }
        })
    });
    out
}

impl<'a> Oracle<'a> {
    pub fn new(theory: &'a Theory, model: &'a InitialModel) -> Self {
        Oracle {
            theory,
            model,
            lra: Lra::new(theory.object_valued()),
            instances: Mutex::default(),
        }
    }

    pub fn lra(&self) -> &Lra {
        &self.lra
    }

    /// Definitions inlined, statics and object quantifiers resolved, and
    /// object-valued fluent terms split over their domains.
    pub fn prepare(&self, f: &Formula) -> Formula {
        let g = simplify_with(
            &self.model.expand(f),
            &SimplifyContext::with_facts(self.model),
        );
        self.split_objects(g)
    }

    fn object_sort(&self, t: &Term) -> Option<Symbol> {
        let sort = match t {
            Term::Fluent(n, ..) => match &self.theory.fluent(n)?.kind {
                FluentKind::Fun(s) => s.clone(),
                _ => return None,
            },
            Term::Static(n, _) => match &self.theory.static_decl(n)?.kind {
                StaticKind::Fun(s) => s.clone(),
                _ => return None,
            },
            _ => return None,
        };
        match sort {
            Sort::Object(d) => Some(d),
            _ => None,
        }
    }

    fn splittable(&self, f: &Formula, bound: &mut Vec<Var>) -> Option<(Term, Symbol)> {
        match f {
            Formula::Exists(v, b) | Formula::Forall(v, b) => {
                bound.push(v.clone());
                let r = self.splittable(b, bound);
                bound.pop();
                r
            }
            a if a.is_atom() => {
                let mut found = None;
                for t in a.atom_terms() {
                    t.visit(&mut |x| {
                        if found.is_none() && !bound.iter().any(|v| x.mentions_var(v)) {
                            if let Some(d) = self.object_sort(x) {
                                found = Some((x.clone(), d));
                            }
                        }
                    });
                }
                found
            }
            other => other
                .children()
                .into_iter()
                .find_map(|c| self.splittable(c, bound)),
        }
    }

    fn split_objects(&self, f: Formula) -> Formula {
        let Some((t, dom)) = self.splittable(&f, &mut Vec::new()) else {
            return f;
        };
        let ctx = SimplifyContext::with_facts(self.model);
        let cases = self
            .model
            .domain_of(&dom)
            .iter()
            .map(|o| {
                let body = simplify_with(&replace(&f, &t, o), &ctx);
                Formula::and(vec![
                    Formula::Eq(t.clone(), o.clone()),
                    self.split_objects(body),
                ])
            })
            .collect();
        simplify_with(&Formula::or(cases), &ctx)
    }

    /// The state constraints instantiated at `sit`, split into conjuncts.
    pub fn constraint_instances(&self, sit: &Term) -> Vec<Formula> {
        if let Some(v) = self.instances.lock().unwrap().get(sit) {
            return v.clone();
        }
        let ctx = SimplifyContext::with_facts(self.model);
        let mut out = Vec::new();
        for c in &self.theory.constraints {
            let g = simplify_with(&self.model.expand(&at_situation(&c.formula, sit)), &ctx);
            out.extend(g.conjuncts().into_iter().filter(|c| !c.is_true()).cloned());
        }
        self.instances
            .lock()
            .unwrap()
            .insert(sit.clone(), out.clone());
        out
    }

    /// Constraint instances connected to `f` through shared state.
    pub fn relevant(&self, f: &Formula, instances: &[Formula]) -> Vec<Formula> {
        let mut keys = state_keys(f);
        let inst_keys: Vec<BTreeSet<Term>> = instances.iter().map(state_keys).collect();
        let mut taken = vec![false; instances.len()];
        loop {
            let mut changed = false;
            for (i, k) in inst_keys.iter().enumerate() {
                if !taken[i] && !k.is_disjoint(&keys) {
                    taken[i] = true;
                    keys.extend(k.iter().cloned());
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        instances
            .iter()
            .zip(taken)
            .filter(|(_, t)| *t)
            .map(|(c, _)| c.clone())
            .collect()
    }

    /// A model of `f` together with the relevant constraint instances at
    /// `sit`, if any.
    pub fn witness(&self, f: &Formula, sit: Option<&Term>) -> Result<Option<Witness>, QeError> {
        let mut parts = vec![f.clone()];
        if let Some(s) = sit {
            let inst = self.constraint_instances(s);
            parts.extend(self.relevant(f, &inst));
        }
        sat::find_witness(&self.prepare(&Formula::and(parts)), &self.lra)
    }

    pub fn sat(&self, f: &Formula, sit: Option<&Term>) -> Result<bool, QeError> {
        Ok(self.witness(f, sit)?.is_some())
    }

    /// Whether `f` holds in every state satisfying the constraints at `sit`.
    pub fn valid(&self, f: &Formula, sit: Option<&Term>) -> Result<bool, QeError> {
        Ok(!self.sat(&Formula::not(f.clone()), sit)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_theory;

    const TRAFFIC: &str = include_str!("../../data/traffic.tbat");

    #[test]
    fn constraints_rule_out_two_signals() {
        let (th, _) = parse_theory(TRAFFIC).unwrap();
        let (m, _) = InitialModel::build(&th);
        let o = Oracle::new(&th, &m);
        let s = Term::var(&Var::sit("s"));
        let args = vec![Term::obj("I"), Term::obj("in1")];
        let both = Formula::and(vec![
            Formula::Rel("Red".into(), args.clone(), s.clone()),
            Formula::Rel("Green".into(), args.clone(), s.clone()),
        ]);
        assert!(o.sat(&both, None).unwrap());
        assert!(!o.sat(&both, Some(&s)).unwrap());
        // Antiphase links in1 to in2 through the crossing constraint.
        let cross = Formula::and(vec![
            Formula::Rel("Red".into(), args, s.clone()),
            Formula::Rel(
                "Red".into(),
                vec![Term::obj("I"), Term::obj("in2")],
                s.clone(),
            ),
        ]);
        assert!(!o.sat(&cross, Some(&s)).unwrap());
    }
}
