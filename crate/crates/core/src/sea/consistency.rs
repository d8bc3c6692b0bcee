//! Totality, uniqueness and initial agreement of the compiled laws.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;

use super::disjoin::second_value;
use super::{describe_grounding, groundings, Sea};
use crate::arith::linear::LinExpr;
use crate::arith::mpoly::MPoly;
use crate::arith::sat::Witness;
use crate::arith::timeset;
use crate::arith::QeError;
use crate::dsl::theory::{init_name, Diagnostic, Theory};
use crate::eval::oracle::replace;
use crate::eval::Oracle;
use crate::logic::{
    format_rat, rat, simplify, subst_formula, subst_term, Formula, Rat, Subst, Symbol, Term, Var,
};

/// If `f` is `y = e` with `e` free of `y`, returns `e`.
pub fn explicit_value(f: &Formula, y: &Var) -> Option<Term> {
    match f {
        Formula::Eq(Term::Var(v), e) | Formula::Eq(e, Term::Var(v))
            if v == y && !e.mentions_var(y) =>
        {
            Some(e.clone())
        }
        _ => None,
    }
}

/// `g(x, start(s), s)` becomes `g_init(x, s)` for every temporal fluent:
/// each fluent's own laws are checked for that agreement, and stratification
/// keeps the argument well-founded.
fn at_start_values(t: &Term) -> Term {
    match t {
        Term::Temporal(n, args, time, sit) if **time == Term::Start(sit.clone()) => Term::Fluent(
            Symbol::new(&init_name(n)),
            args.iter().map(at_start_values).collect(),
            sit.clone(),
        ),
        _ => t.map_children(at_start_values),
    }
}

fn at_start_formula(f: &Formula) -> Formula {
    if f.is_atom() {
        f.map_atom_terms(at_start_values)
    } else {
        f.map_children(at_start_formula)
    }
}

fn is_linear(t: &Term) -> bool {
    LinExpr::from_term(t).is_some()
}

/// Whether every arithmetic atom is linear over its unknowns.
pub fn lra_linear(f: &Formula, oracle: &Oracle) -> bool {
    !f.any_atom(&mut |a| match a {
        Formula::Cmp(_, x, y) => !(is_linear(x) && is_linear(y)),
        Formula::Eq(x, y) => {
            !is_object(x, oracle) && !is_object(y, oracle) && !(is_linear(x) && is_linear(y))
        }
        _ => false,
    })
}

fn is_object(t: &Term, oracle: &Oracle) -> bool {
    match t {
        Term::Obj(_) | Term::Action { .. } => true,
        Term::Var(v) => v.sort != crate::logic::Sort::Real,
        Term::Fluent(n, ..) | Term::Static(n, _) => oracle.lra().object_valued.contains(n),
        _ => false,
    }
}

struct Ctx<'a> {
    sea: &'a Sea,
    oracle: &'a Oracle<'a>,
    sit: Term,
    out: Vec<Diagnostic>,
}

impl Ctx<'_> {
    fn fail(&mut self, what: &str, branch: usize, args: &[Term], w: impl std::fmt::Display) {
        let head = self.sea.head();
        self.out.push(Diagnostic::error(
            "inconsistent-law",
            format!(
                "law of `{}` under context `{}` {what}{}: {w}",
                self.sea.fluent,
                self.sea.branches[branch].context,
                describe_grounding(&head, args)
            ),
            None,
        ));
    }

    fn undecided(&mut self, branch: usize, e: impl std::fmt::Display) {
        self.out.push(Diagnostic::warning(
            "nonlinear-law",
            format!(
                "law `{}` of `{}` is outside linear arithmetic ({e}); assert its totality, uniqueness and agreement with `{}` at the start of the situation",
                self.sea.branches[branch].law, self.sea.fluent, self.sea.init
            ),
            None,
        ));
    }

    fn witness(&self, f: &Formula) -> Result<Option<Witness>, QeError> {
        self.oracle.witness(f, Some(&self.sit))
    }

    /// Returns false once a violation or an undecided check was reported.
    fn check_branch(&mut self, k: usize, args: &[Term]) -> bool {
        let sea = self.sea;
        let (t, y) = (Term::var(&sea.time), Term::var(&sea.value));
        let gamma = sea.context_at(k, args, &self.sit);
        match self.witness(&gamma) {
            Ok(None) => return true,
            Ok(Some(_)) => {}
            Err(e) => {
                self.undecided(k, e);
                return false;
            }
        }
        let delta = sea.law_at(k, args, &t, &y, &self.sit);
        let prepared = self.oracle.prepare(&delta);
        let init = subst_term(&sea.init_term(), &sea.head().grounding(args));
        let start = Term::Start(Box::new(self.sit.clone()));

        if let Some(e) = explicit_value(&prepared, &sea.value) {
            let mut at_start = Subst::new();
            at_start.insert(sea.time.clone(), start.clone());
            let diff = MPoly::from_term(&at_start_values(&subst_term(&e, &at_start)))
                .sub(&MPoly::from_term(&init));
            if diff.is_zero() {
                return true;
            }
            let diff = diff.to_term();
            if !is_linear(&diff) {
                self.undecided(k, format!("cannot compare `{e}` with `{init}`"));
                return false;
            }
            let f = Formula::and(vec![gamma, Formula::ne(diff, Term::Num(rat(0)))]);
            return match self.witness(&f) {
                Ok(None) => true,
                Ok(Some(w)) => {
                    self.fail(
                        &format!(
                            "disagrees with `{}` at the start of the situation",
                            sea.init
                        ),
                        k,
                        args,
                        w,
                    );
                    false
                }
                Err(e) => {
                    self.undecided(k, e);
                    false
                }
            };
        }

        if !lra_linear(&prepared, self.oracle) {
            return self.sample(k, args, &gamma, &prepared, &init);
        }
        let y2 = second_value(&sea.head(), &[&delta, &gamma]);
        let mut rename = Subst::new();
        rename.insert(sea.value.clone(), Term::var(&y2));
        let mut at_start = Subst::new();
        at_start.insert(sea.time.clone(), start);
        let checks = [
            (
                "defines no value",
                Formula::and(vec![
                    gamma.clone(),
                    Formula::not(Formula::exists(sea.value.clone(), delta.clone())),
                ]),
            ),
            (
                "defines more than one value",
                Formula::and(vec![
                    gamma.clone(),
                    delta.clone(),
                    subst_formula(&delta, &rename),
                    Formula::lt(y.clone(), Term::var(&y2)),
                ]),
            ),
            (
                "disagrees with the init fluent at the start of the situation",
                Formula::and(vec![
                    gamma.clone(),
                    at_start_formula(&subst_formula(&delta, &at_start)),
                    Formula::ne(y.clone(), init),
                ]),
            ),
        ];
        for (what, f) in checks {
            match self.witness(&f) {
                Ok(None) => {}
                Ok(Some(w)) => {
                    self.fail(what, k, args, w);
                    return false;
                }
                Err(e) => {
                    self.undecided(k, e);
                    return false;
                }
            }
        }
        true
    }

    /// Nonlinear laws: exact root counting in the value at sample points
    /// for the remaining unknowns. A clean run is still only a warning.
    fn sample(
        &mut self,
        k: usize,
        args: &[Term],
        gamma: &Formula,
        delta: &Formula,
        init: &Term,
    ) -> bool {
        let y = &self.sea.value;
        let mut unknowns: BTreeSet<Term> = BTreeSet::new();
        let mut polynomial = true;
        delta.visit_atoms(&mut |a| match a {
            Formula::Cmp(_, l, r) | Formula::Eq(l, r) => {
                for side in [l, r] {
                    unknowns.extend(MPoly::from_term(side).atoms());
                }
            }
            Formula::True | Formula::False => {}
            _ => polynomial = false,
        });
        let mut bound = false;
        delta.visit_binders(&mut |_| bound = true);
        unknowns.remove(&Term::var(y));
        unknowns.insert(init.clone());
        let start = Term::Start(Box::new(self.sit.clone()));
        if unknowns.contains(&Term::var(&self.sea.time)) {
            unknowns.insert(start.clone());
        }
        if !polynomial || bound {
            self.undecided(k, "not a polynomial condition on the value");
            return false;
        }
        let grid = [rat(0), rat(1), rat(3)];
        let unknowns: Vec<Term> = unknowns.into_iter().collect();
        let points = unknowns
            .iter()
            .map(|_| grid.iter())
            .multi_cartesian_product()
            .take(81);
        let points: Vec<Vec<&Rat>> = points.collect();
        let mut checked = 0;
        let mut disagreement = None;
        for point in points {
            let env: Vec<(Term, Rat)> = unknowns
                .iter()
                .cloned()
                .zip(point.into_iter().cloned())
                .collect();
            let fix = |f: &Formula| {
                simplify(
                    &env.iter()
                        .fold(f.clone(), |g, (a, v)| replace(&g, a, &Term::Num(v.clone()))),
                )
            };
            if !matches!(self.witness(&fix(gamma)), Ok(Some(_))) {
                continue;
            }
            let shown = || {
                env.iter()
                    .map(|(a, v)| format!("{a} = {}", format_rat(v)))
                    .join(", ")
            };
            let values = match timeset::solve(&fix(delta), y, None, None) {
                Ok(s) => s,
                Err(e) => {
                    self.undecided(k, e);
                    return false;
                }
            };
            checked += 1;
            let single = match values.intervals.as_slice() {
                [] => {
                    self.fail("defines no value", k, args, shown());
                    return false;
                }
                [i] if i.lo == i.hi => i.lo.as_rat().cloned(),
                _ => {
                    self.fail(
                        "defines more than one value",
                        k,
                        args,
                        format!("{}; {y} in {values}", shown()),
                    );
                    return false;
                }
            };
            let value_of = |t: &Term| env.iter().find(|(a, _)| a == t).map(|(_, v)| v.clone());
            let at_start =
                value_of(&Term::var(&self.sea.time)).is_some_and(|v| value_of(&start) == Some(v));
            if at_start && single != value_of(init) && disagreement.is_none() {
                disagreement = Some(format!("{}; {y} in {values}", shown()));
            }
        }
        if let Some(w) = disagreement {
            self.fail(
                "disagrees with the init fluent at the start of the situation",
                k,
                args,
                w,
            );
            return false;
        }
        self.undecided(k, format!("checked at {checked} sample points only"));
        false
    }
}

/// Checks every branch of every evolution axiom at every grounding of its
/// parameters. The situation is kept generic; state constraints restrict
/// the states considered.
pub fn check_consistency(th: &Theory, oracle: &Oracle, seas: &[Sea]) -> Vec<Diagnostic> {
    seas.par_iter()
        .map(|sea| {
            let mut ctx = Ctx {
                sea,
                oracle,
                sit: Term::var(&sea.sit),
                out: Vec::new(),
            };
            'branches: for k in 0..sea.branches.len() {
                for args in groundings(th, &sea.head()) {
                    if !ctx.check_branch(k, &args) {
                        continue 'branches;
                    }
                }
            }
            ctx.out
        })
        .flatten()
        .collect()
}
