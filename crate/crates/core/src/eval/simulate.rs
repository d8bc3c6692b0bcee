//! Forward simulation of a narrative from the initial model: successor
//! state axioms, init axioms and direct evaluation of the applicable branch
//! of each evolution axiom. Regression is never used here.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use thiserror::Error;

use super::evaluate::{evaluate, ground, EvalError};
use super::model::InitialModel;
use crate::arith::timeset::{self, TimeSetError};
use crate::dsl::theory::FluentKind;
use crate::logic::simplify::simplify_term_with;
use crate::logic::{
    format_rat, subst_formula, Formula, Rat, SimplifyContext, Sort, Subst, Symbol, Term, Var,
};
use crate::sea::Compiled;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    TimeSet(#[from] TimeSetError),
    #[error("no branch of the evolution axiom of `{0}` applies")]
    NoBranch(String),
    #[error("branches {branches:?} of the evolution axiom of `{term}` apply together")]
    Ambiguous { term: String, branches: Vec<usize> },
    #[error("`{0}` does not define a unique value: {1}")]
    NotFunctional(String, String),
    #[error("invalid narrative: {0}")]
    Narrative(String),
    #[error("`{0}` does not refer to a prefix of the narrative")]
    NotPrefix(String),
}

type SR<T> = Result<T, SimulationError>;

/// The state of every prefix of a narrative. `states[j]` describes the
/// situation after the first `j` actions, read as a model of `S0`.
#[derive(Debug)]
pub struct Simulation<'a> {
    compiled: &'a Compiled,
    pub situations: Vec<Term>,
    pub states: Vec<InitialModel>,
    cache: Mutex<HashMap<(usize, Term), Rat>>,
}

/// Values of all fluents at time `time` in the last situation of a
/// narrative.
#[derive(Clone, Debug, PartialEq)]
pub struct TimedValuation {
    pub situation: Term,
    pub start: Rat,
    pub time: Rat,
    /// Temporal fluents at `time`, keyed by name and arguments.
    pub temporal: BTreeMap<(Symbol, Vec<Term>), Rat>,
    pub state: InitialModel,
}

impl TimedValuation {
    pub fn get(&self, fluent: &str, args: &[Term]) -> Option<&Rat> {
        self.temporal.get(&(Symbol::new(fluent), args.to_vec()))
    }
}

fn action_time(a: &Term) -> SR<Rat> {
    match a {
        Term::Action { time, .. } => time
            .as_num()
            .cloned()
            .ok_or_else(|| SimulationError::Narrative(format!("time of `{a}` is not a number"))),
        _ => Err(SimulationError::Narrative(format!(
            "`{a}` is not an action"
        ))),
    }
}

/// The single rational value of `y` satisfying `f`.
fn unique_value(f: &Formula, y: &Var, what: &dyn Fn() -> String) -> SR<Rat> {
    let set = timeset::solve(f, y, None, None)?;
    match set.intervals.as_slice() {
        [i] if i.lo == i.hi && i.lo_closed => match i.lo.as_rat() {
            Some(r) => Ok(r.clone()),
            None => Err(SimulationError::NotFunctional(
                what(),
                format!("irrational value {}", i.lo),
            )),
        },
        _ => Err(SimulationError::NotFunctional(
            what(),
            format!("values {set}"),
        )),
    }
}

fn map_formula_terms(f: &Formula, g: &mut impl FnMut(&Term) -> Term) -> Formula {
    if f.is_atom() {
        return f.map_atom_terms(|t| g(t));
    }
    f.map_children(|c| map_formula_terms(c, g))
}

impl<'a> Simulation<'a> {
    /// Simulates `narrative` from the initial model. Action times must not
    /// decrease; preconditions are not checked.
    pub fn run(c: &'a Compiled, narrative: &[Term]) -> SR<Simulation<'a>> {
        let mut sim = Simulation {
            compiled: c,
            situations: vec![Term::S0],
            states: vec![c.model.clone()],
            cache: Mutex::default(),
        };
        for a in narrative {
            let t = action_time(a)?;
            let j = sim.states.len() - 1;
            if t < sim.states[j].start {
                return Err(SimulationError::Narrative(format!(
                    "`{a}` occurs before the start {} of its situation",
                    format_rat(&sim.states[j].start)
                )));
            }
            let next = sim.successor(j, a, t)?;
            sim.states.push(next);
            let s = Term::do_(a.clone(), sim.situations[j].clone());
            sim.situations.push(s);
        }
        Ok(sim)
    }

    pub fn last(&self) -> usize {
        self.states.len() - 1
    }

    fn successor(&self, j: usize, a: &Term, t: Rat) -> SR<InitialModel> {
        let th = &self.compiled.theory;
        let mut next = self.states[j].clone();
        next.start = t;
        for decl in &th.fluents {
            let tuples = th.groundings(&decl.params).unwrap_or_default();
            match &decl.kind {
                FluentKind::Temporal => {}
                FluentKind::Rel => {
                    let Some(ssa) = th.ssa_for(&decl.name) else {
                        continue;
                    };
                    for args in tuples {
                        let mut s: Subst = ssa
                            .params
                            .iter()
                            .cloned()
                            .zip(args.iter().cloned())
                            .collect();
                        s.insert(ssa.action.clone(), a.clone());
                        s.insert(ssa.sit.clone(), Term::S0);
                        next.set_holds(
                            &decl.name,
                            args,
                            self.truth(j, &subst_formula(&ssa.rhs, &s))?,
                        );
                    }
                }
                FluentKind::Fun(sort) => {
                    let Some(ssa) = th.ssa_for(&decl.name) else {
                        continue;
                    };
                    let Some(y) = &ssa.value else { continue };
                    for args in tuples {
                        let mut s: Subst = ssa
                            .params
                            .iter()
                            .cloned()
                            .zip(args.iter().cloned())
                            .collect();
                        s.insert(ssa.action.clone(), a.clone());
                        s.insert(ssa.sit.clone(), Term::S0);
                        let rhs = subst_formula(&ssa.rhs, &s);
                        let shown = || {
                            Term::Fluent(decl.name.clone(), args.clone(), Box::new(Term::S0))
                                .to_string()
                        };
                        let v = match sort {
                            Sort::Real => {
                                Term::Num(unique_value(&self.resolved(j, &rhs)?, y, &shown)?)
                            }
                            Sort::Object(name) => {
                                let mut hits = Vec::new();
                                for o in self.states[j].domain_of(name) {
                                    let mut b = Subst::new();
                                    b.insert(y.clone(), o.clone());
                                    if self.truth(j, &subst_formula(&rhs, &b))? {
                                        hits.push(o.clone());
                                    }
                                }
                                match <[Term; 1]>::try_from(hits) {
                                    Ok([o]) => o,
                                    Err(h) => {
                                        return Err(SimulationError::NotFunctional(
                                            shown(),
                                            format!("{h:?}"),
                                        ))
                                    }
                                }
                            }
                            _ => continue,
                        };
                        next.set_value(&decl.name, args, v);
                    }
                }
                FluentKind::Init { .. } => {
                    let Some(ssa) = self.compiled.init_ssa(&decl.name) else {
                        continue;
                    };
                    for args in tuples {
                        let f = ssa.instantiate(&args, a, &Term::var(&ssa.value), &Term::S0);
                        let shown = || {
                            Term::Fluent(decl.name.clone(), args.clone(), Box::new(Term::S0))
                                .to_string()
                        };
                        let v = unique_value(&self.resolved(j, &f)?, &ssa.value, &shown)?;
                        next.set_value(&decl.name, args, Term::Num(v));
                    }
                }
            }
        }
        Ok(next)
    }

    /// `f` about `S0` read in state `j`, with statics resolved and every
    /// ground temporal term replaced by its value.
    fn resolved(&self, j: usize, f: &Formula) -> SR<Formula> {
        let m = &self.states[j];
        let g = ground(f, m);
        let mut err = None;
        let r = map_formula_terms(&g, &mut |t| match self.resolve_term(j, t) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                t.clone()
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(ground(&r, m)),
        }
    }

    fn resolve_term(&self, j: usize, t: &Term) -> SR<Term> {
        let mut err = None;
        let t = t.map_children(|c| match self.resolve_term(j, c) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                c.clone()
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        match &t {
            Term::Temporal(name, args, time, sit)
                if **sit == Term::S0 && args.iter().all(Term::is_ground) =>
            {
                let ctx = SimplifyContext::full(&self.states[j]);
                let args: Vec<Term> = args.iter().map(|a| simplify_term_with(a, &ctx)).collect();
                match simplify_term_with(time, &ctx) {
                    Term::Num(tau) if args.iter().all(|a| matches!(a, Term::Obj(_))) => {
                        Ok(Term::Num(self.temporal_value(j, name, &args, &tau)?))
                    }
                    _ => Ok(t),
                }
            }
            _ => Ok(t),
        }
    }

    fn truth(&self, j: usize, f: &Formula) -> SR<bool> {
        Ok(evaluate(&self.resolved(j, f)?, &self.states[j])?)
    }

    /// Value of temporal fluent `name(args)` at `time` in state `j`, from
    /// the unique evolution branch whose context holds there.
    pub fn temporal_value(&self, j: usize, name: &Symbol, args: &[Term], time: &Rat) -> SR<Rat> {
        let key = (
            j,
            Term::Temporal(
                name.clone(),
                args.to_vec(),
                Box::new(Term::Num(time.clone())),
                Box::new(Term::S0),
            ),
        );
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let shown = || {
            Term::Temporal(
                name.clone(),
                args.to_vec(),
                Box::new(Term::Num(time.clone())),
                Box::new(self.situations[j].clone()),
            )
            .to_string()
        };
        let sea = self
            .compiled
            .sea(name)
            .ok_or_else(|| SimulationError::NoBranch(shown()))?;
        let n = sea.branches.len() + usize::from(sea.frame);
        let mut fired = Vec::new();
        for i in 0..n {
            if self.truth(j, &sea.context_at(i, args, &Term::S0))? {
                fired.push(i);
            }
        }
        let i = match fired.as_slice() {
            [i] => *i,
            [] => return Err(SimulationError::NoBranch(shown())),
            _ => {
                return Err(SimulationError::Ambiguous {
                    term: shown(),
                    branches: fired,
                })
            }
        };
        let y = Term::var(&sea.value);
        let law = sea.law_at(i, args, &Term::Num(time.clone()), &y, &Term::S0);
        let v = unique_value(&self.resolved(j, &law)?, &sea.value, &shown)?;
        self.cache.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    fn prefix(&self, sit: &Term) -> SR<usize> {
        self.situations
            .iter()
            .position(|s| s == sit)
            .ok_or_else(|| SimulationError::NotPrefix(sit.to_string()))
    }

    /// Truth of a sentence about prefixes of the narrative.
    pub fn holds(&self, w: &Formula) -> SR<bool> {
        let base = &self.states[0];
        let g = simplify_expand(w, base);
        let r = self.localize(&g)?;
        Ok(evaluate(&r, base)?)
    }

    /// Replaces situational atoms and terms by their simulated values.
    fn localize(&self, f: &Formula) -> SR<Formula> {
        match f {
            Formula::Rel(name, args, sit) => {
                let j = self.prefix(sit)?;
                Ok(
                    if self.truth(j, &Formula::Rel(name.clone(), args.clone(), Term::S0))? {
                        Formula::True
                    } else {
                        Formula::False
                    },
                )
            }
            Formula::Poss(a, sit) => {
                let j = self.prefix(sit)?;
                let Term::Action {
                    functor,
                    args,
                    time,
                } = a
                else {
                    return Err(SimulationError::Narrative(format!(
                        "`{a}` is not an action"
                    )));
                };
                let p = self.compiled.theory.poss_for(functor).ok_or_else(|| {
                    SimulationError::Narrative(format!("no precondition for `{functor}`"))
                })?;
                let mut s: Subst = p.params.iter().cloned().zip(args.iter().cloned()).collect();
                s.insert(p.time.clone(), (**time).clone());
                s.insert(p.sit.clone(), Term::S0);
                Ok(if self.truth(j, &subst_formula(&p.rhs, &s))? {
                    Formula::True
                } else {
                    Formula::False
                })
            }
            _ if f.is_atom() => {
                let mut err = None;
                let r = f.map_atom_terms(|t| match self.localize_term(t) {
                    Ok(x) => x,
                    Err(e) => {
                        err.get_or_insert(e);
                        t.clone()
                    }
                });
                err.map_or(Ok(r), Err)
            }
            _ => {
                let mut err = None;
                let r = f.map_children(|c| match self.localize(c) {
                    Ok(x) => x,
                    Err(e) => {
                        err.get_or_insert(e);
                        c.clone()
                    }
                });
                err.map_or(Ok(r), Err)
            }
        }
    }

    fn localize_term(&self, t: &Term) -> SR<Term> {
        let mut err = None;
        let t = t.map_children(|c| match self.localize_term(c) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                c.clone()
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let Some(sit) = t
            .situation_arg()
            .filter(|_| !matches!(t, Term::Do(..)))
            .cloned()
        else {
            return Ok(t);
        };
        let j = self.prefix(&sit)?;
        let here = match &t {
            Term::Start(_) => return Ok(Term::Num(self.states[j].start.clone())),
            Term::Fluent(n, args, _) => Term::Fluent(n.clone(), args.clone(), Box::new(Term::S0)),
            Term::Temporal(n, args, time, _) => {
                Term::Temporal(n.clone(), args.clone(), time.clone(), Box::new(Term::S0))
            }
            _ => return Ok(t),
        };
        let v = self.resolve_term(j, &here)?;
        Ok(simplify_term_with(
            &v,
            &SimplifyContext::full(&self.states[j]),
        ))
    }

    /// All temporal fluents of the last situation at time `t`.
    pub fn valuation_at(&self, t: &Rat) -> SR<TimedValuation> {
        let j = self.last();
        let state = &self.states[j];
        if t < &state.start {
            return Err(SimulationError::Narrative(format!(
                "time {} is before the start {} of the last situation",
                format_rat(t),
                format_rat(&state.start)
            )));
        }
        let th = &self.compiled.theory;
        let mut temporal = BTreeMap::new();
        for decl in th.temporal_fluents() {
            for args in th.groundings(&decl.params).unwrap_or_default() {
                let v = self.temporal_value(j, &decl.name, &args, t)?;
                temporal.insert((decl.name.clone(), args), v);
            }
        }
        Ok(TimedValuation {
            situation: self.situations[j].clone(),
            start: state.start.clone(),
            time: t.clone(),
            temporal,
            state: state.clone(),
        })
    }
}

fn simplify_expand(w: &Formula, m: &InitialModel) -> Formula {
    crate::logic::simplify_with(&m.expand(w), &SimplifyContext::full(m))
}

/// Simulates `narrative` and reads every temporal fluent at `t`.
pub fn forward_simulate(c: &Compiled, narrative: &[Term], t: &Rat) -> SR<TimedValuation> {
    Simulation::run(c, narrative)?.valuation_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_narrative, parse_query};
    use crate::logic::rat;
    use crate::sea::compile_source;

    fn traffic() -> Compiled {
        compile_source(include_str!("../../data/traffic.tbat")).unwrap()
    }

    fn lane(r: &str) -> Vec<Term> {
        vec![Term::obj("I"), Term::obj(r)]
    }

    #[test]
    fn queue_after_two_switches() {
        let c = traffic();
        let n = parse_narrative(&c.theory, "switch(I)@1; switch(I)@2").unwrap();
        let v = forward_simulate(&c, &n, &rat(3)).unwrap();
        assert_eq!(v.get("que", &lane("in1")), Some(&rat(70)));
        // in2 drains on green until 1, then on the right arrow until 2.
        assert_eq!(v.get("que", &lane("in2")), Some(&rat(60 - 12 - 4)));
        assert!(v.state.holds(&Symbol::new("Green"), &lane("in1")));
        assert_eq!(
            v.state.value(&Symbol::new("que_init"), &lane("in1")),
            Some(&Term::Num(rat(90)))
        );
    }

    #[test]
    fn queries_over_prefixes() {
        let c = traffic();
        let n = parse_narrative(&c.theory, "switch(I)@1; switch(I)@2").unwrap();
        let sim = Simulation::run(&c, &n).unwrap();
        let sit = sim.situations[2].clone();
        for (q, expected) in [
            ("que(I, in1, 3) < 95", true),
            ("que(I, in1, 3) = 70 & que_init(I, in1) = 90", true),
            ("LArr(I, in2) & Green(I, in1)", false),
            ("Poss(switch(I, 5/2), SIT)", true),
            ("Poss(empty(I, in1, 3), SIT)", false),
        ] {
            let q = q.replace("SIT", &sit.to_string());
            let w = parse_query(&c.theory, &q, sit.clone(), Vec::new()).unwrap();
            assert_eq!(sim.holds(&w).unwrap(), expected, "{q}");
        }
    }

    #[test]
    fn decreasing_times_are_rejected() {
        let c = traffic();
        let n = parse_narrative(&c.theory, "switch(I)@2; switch(I)@1").unwrap();
        assert!(matches!(
            Simulation::run(&c, &n),
            Err(SimulationError::Narrative(_))
        ));
        assert!(forward_simulate(&c, &n[..1], &rat(1)).is_err());
    }
}
