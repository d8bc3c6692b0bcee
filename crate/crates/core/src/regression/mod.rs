//! Temporal regression: rewriting a regressable formula into an equivalent
//! one about an earlier situation, with a step-by-step trace.

pub mod diagnose;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::theory::FluentKind;
use crate::eval::evaluate;
use crate::eval::oracle::replace;
use crate::logic::subst::{fresh_var, replace_in_atom};
use crate::logic::{
    is_regressable_with, simplify_with, subst_formula, Formula, SimplifyContext, Subst, Symbol,
    Term, Var,
};
use crate::sea::Compiled;

pub use diagnose::{diagnose, Attribution, DiagnosisReport, PrefixVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Poss,
    StartOfDo,
    RelationalSsa,
    FunctionalSsa,
    InitSsa,
    TemporalSea,
    Simplify,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Poss => "poss",
            Rule::StartOfDo => "start-of-do",
            Rule::RelationalSsa => "relational-ssa",
            Rule::FunctionalSsa => "functional-ssa",
            Rule::InitSsa => "init-ssa",
            Rule::TemporalSea => "temporal-sea",
            Rule::Simplify => "simplify",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rewrite of the whole formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub rule: Rule,
    /// Depth of the situation the rewritten term or atom refers to.
    pub depth: usize,
    pub before: Formula,
    pub after: Formula,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regression {
    pub formula: Formula,
    pub trace: Vec<Step>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegressionError {
    #[error("formula is not regressable: {0}")]
    NotRegressable(String),
    #[error("stop situation {stop} is not a prefix of {sit}")]
    NotPrefix { stop: String, sit: String },
    #[error("more than {0} temporal expansions; the theory is probably not stratified")]
    StepBound(usize),
    #[error("no axiom defines `{0}`")]
    MissingAxiom(String),
}

/// How contexts of evolution axioms are handled during expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    /// Contexts are regressed and decided in the initial model, so only
    /// the applicable law is kept.
    #[default]
    Resolve,
    /// Every branch is kept; the result is equivalent under any initial
    /// theory agreeing on the statics.
    Symbolic,
}

pub const DEFAULT_STEP_BOUND: usize = 100_000;

pub struct Regressor<'a> {
    compiled: &'a Compiled,
    mode: Mode,
    limit: usize,
    decided: Mutex<HashMap<Formula, Option<bool>>>,
}

fn is_prefix(stop: &Term, sit: &Term) -> bool {
    let mut cur = sit;
    loop {
        if cur == stop {
            return true;
        }
        match cur {
            Term::Do(_, s) => cur = s,
            _ => return false,
        }
    }
}

/// Situation terms occurring in `f`, outermost first.
fn situations(f: &Formula) -> Vec<Term> {
    let mut out = Vec::new();
    let mut push = |s: &Term| {
        if !out.contains(s) {
            out.push(s.clone());
        }
    };
    f.visit_atoms(&mut |a| match a {
        Formula::Rel(_, _, s) | Formula::Poss(_, s) => push(s),
        _ => {}
    });
    f.visit_terms(&mut |t| {
        t.visit(&mut |x| {
            if let Some(s) = x.situation_arg() {
                push(s);
            }
        })
    });
    out
}

/// `start(do(α, σ))` beyond `stop` rewritten to `time(α)`.
fn start_of_do(t: &Term, stop: &Term) -> Term {
    let t = t.map_children(|c| start_of_do(c, stop));
    match &t {
        Term::Start(s) if s.as_ref() != stop => match s.as_ref() {
            Term::Do(a, _) => Term::Time(a.clone()),
            _ => t,
        },
        _ => t,
    }
}

fn map_terms(f: &Formula, g: &impl Fn(&Term) -> Term) -> Formula {
    if f.is_atom() {
        return f.map_atom_terms(g);
    }
    f.map_children(|c| map_terms(c, g))
}

struct Site {
    rule: Rule,
    atom: Formula,
    replacement: Formula,
    depth: usize,
    note: Option<String>,
}

impl<'a> Regressor<'a> {
    pub fn new(compiled: &'a Compiled) -> Self {
        Regressor {
            compiled,
            mode: Mode::Resolve,
            limit: DEFAULT_STEP_BOUND,
            decided: Mutex::default(),
        }
    }

    pub fn mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn step_bound(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    /// Full regression to `S0`.
    pub fn regress(&self, w: &Formula) -> Result<Regression, RegressionError> {
        self.regress_to(w, &Term::S0)
    }

    /// Regression that does not go below `stop`; the result is uniform in
    /// `stop`. Temporal fluents at `stop` itself are expanded into the init
    /// fluent and the context conditions there.
    pub fn regress_to(&self, w: &Formula, stop: &Term) -> Result<Regression, RegressionError> {
        let th = &self.compiled.theory;
        if !is_regressable_with(w, &|a: &Symbol| th.action(a).is_some()) {
            return Err(RegressionError::NotRegressable(w.to_string()));
        }
        for s in situations(w) {
            if !is_prefix(stop, &s) {
                return Err(RegressionError::NotPrefix {
                    stop: stop.to_string(),
                    sit: s.to_string(),
                });
            }
        }
        let mut trace = Vec::new();
        let formula = self.run(w, stop, Some(&mut trace))?;
        Ok(Regression { formula, trace })
    }

    fn ctx(&self) -> SimplifyContext<'_> {
        SimplifyContext::with_facts(&self.compiled.model)
    }

    fn run(
        &self,
        w: &Formula,
        stop: &Term,
        mut trace: Option<&mut Vec<Step>>,
    ) -> Result<Formula, RegressionError> {
        let mut record =
            |rule: Rule, depth: usize, before: &Formula, after: &Formula, note: Option<String>| {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(Step {
                        rule,
                        depth,
                        before: before.clone(),
                        after: after.clone(),
                        note,
                    });
                }
            };
        let mut cur = w.clone();
        let mut expansions = 0;
        loop {
            let sod = map_terms(&cur, &|t| start_of_do(t, stop));
            if sod != cur {
                record(Rule::StartOfDo, 0, &cur, &sod, None);
                cur = sod;
            }
            let simp = simplify_with(&cur, &self.ctx());
            if simp != cur {
                record(Rule::Simplify, 0, &cur, &simp, None);
                cur = simp;
            }
            let Some(site) = self.find(&cur, stop)? else {
                break;
            };
            if site.rule == Rule::TemporalSea {
                expansions += 1;
                if expansions > self.limit {
                    return Err(RegressionError::StepBound(self.limit));
                }
            }
            let next = replace_atoms(&cur, &site.atom, &site.replacement);
            record(site.rule, site.depth, &cur, &next, site.note);
            cur = next;
        }
        Ok(cur)
    }

    fn find(&self, f: &Formula, stop: &Term) -> Result<Option<Site>, RegressionError> {
        let mut result = None;
        let mut err = None;
        f.any_atom(&mut |a| match self.site(a, f, stop) {
            Ok(Some(s)) => {
                result = Some(s);
                true
            }
            Ok(None) => false,
            Err(e) => {
                err = Some(e);
                true
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(result),
        }
    }

    fn beyond(sit: &Term, stop: &Term) -> bool {
        sit != stop && matches!(sit, Term::Do(..))
    }

    fn site(
        &self,
        atom: &Formula,
        whole: &Formula,
        stop: &Term,
    ) -> Result<Option<Site>, RegressionError> {
        let th = &self.compiled.theory;
        match atom {
            Formula::Poss(
                Term::Action {
                    functor,
                    args,
                    time,
                },
                sit,
            ) => {
                let p = th
                    .poss_for(functor)
                    .ok_or_else(|| RegressionError::MissingAxiom(format!("Poss({functor})")))?;
                let mut s: Subst = p.params.iter().cloned().zip(args.iter().cloned()).collect();
                s.insert(p.time.clone(), (**time).clone());
                s.insert(p.sit.clone(), sit.clone());
                return Ok(Some(Site {
                    rule: Rule::Poss,
                    atom: atom.clone(),
                    replacement: subst_formula(&p.rhs, &s),
                    depth: sit.situation_depth(),
                    note: None,
                }));
            }
            Formula::Rel(name, args, sit @ Term::Do(act, prev)) if Self::beyond(sit, stop) => {
                let a = th
                    .ssa_for(name)
                    .ok_or_else(|| RegressionError::MissingAxiom(name.to_string()))?;
                let mut s: Subst = a.params.iter().cloned().zip(args.iter().cloned()).collect();
                s.insert(a.action.clone(), (**act).clone());
                s.insert(a.sit.clone(), (**prev).clone());
                return Ok(Some(Site {
                    rule: Rule::RelationalSsa,
                    atom: atom.clone(),
                    replacement: subst_formula(&a.rhs, &s),
                    depth: sit.situation_depth(),
                    note: None,
                }));
            }
            _ => {}
        }
        let mut target = None;
        for t in atom.atom_terms() {
            if target.is_none() {
                target = self.term_site(t, stop);
            }
        }
        let Some(term) = target else { return Ok(None) };
        let mut avoid: BTreeSet<Symbol> = whole.all_names();
        for s in &self.compiled.seas {
            avoid.extend(s.rhs().all_names());
        }
        let sort = match &term {
            Term::Fluent(name, ..) => th
                .fluent(name)
                .and_then(|d| d.value_sort())
                .unwrap_or(crate::logic::Sort::Real),
            _ => crate::logic::Sort::Real,
        };
        let y = fresh_var(&Var::new("y", sort), &avoid);
        let with_y = replace_in_atom(atom, &term, &Term::var(&y));
        let (rule, case, note) = match &term {
            Term::Fluent(name, args, sit) => {
                let Term::Do(act, prev) = sit.as_ref() else {
                    unreachable!("checked by term_site")
                };
                let decl = th
                    .fluent(name)
                    .ok_or_else(|| RegressionError::MissingAxiom(name.to_string()))?;
                if let FluentKind::Init { .. } = decl.kind {
                    let ssa = self
                        .compiled
                        .init_ssa(name)
                        .ok_or_else(|| RegressionError::MissingAxiom(name.to_string()))?;
                    (
                        Rule::InitSsa,
                        ssa.instantiate(args, act, &Term::var(&y), prev),
                        None,
                    )
                } else {
                    let a = th
                        .ssa_for(name)
                        .ok_or_else(|| RegressionError::MissingAxiom(name.to_string()))?;
                    let mut s: Subst = a.params.iter().cloned().zip(args.iter().cloned()).collect();
                    s.insert(a.action.clone(), (**act).clone());
                    s.insert(a.sit.clone(), (**prev).clone());
                    if let Some(v) = &a.value {
                        s.insert(v.clone(), Term::var(&y));
                    }
                    (Rule::FunctionalSsa, subst_formula(&a.rhs, &s), None)
                }
            }
            Term::Temporal(name, args, time, sit) => {
                let (case, note) = self.expand_temporal(name, args, time, sit, &y)?;
                (Rule::TemporalSea, case, note)
            }
            _ => unreachable!("term_site returns fluent terms only"),
        };
        let depth = term.situation_arg().map_or(0, Term::situation_depth);
        let replacement = Formula::exists(y, Formula::and(vec![case, with_y]));
        Ok(Some(Site {
            rule,
            atom: atom.clone(),
            replacement,
            depth,
            note,
        }))
    }

    /// Innermost fluent term the rules apply to.
    fn term_site(&self, t: &Term, stop: &Term) -> Option<Term> {
        for c in t.children() {
            if let Some(x) = self.term_site(c, stop) {
                return Some(x);
            }
        }
        match t {
            Term::Fluent(_, _, sit) if Self::beyond(sit, stop) => Some(t.clone()),
            Term::Temporal(..) => Some(t.clone()),
            _ => None,
        }
    }

    /// The case formula for `f(args, time, sit) = y`, choosing between the
    /// init value at `start(sit)` and the evolution axiom elsewhere.
    fn expand_temporal(
        &self,
        name: &Symbol,
        args: &[Term],
        time: &Term,
        sit: &Term,
        y: &Var,
    ) -> Result<(Formula, Option<String>), RegressionError> {
        let sea = self
            .compiled
            .sea(name)
            .ok_or_else(|| RegressionError::MissingAxiom(name.to_string()))?;
        let yt = Term::var(y);
        let init = Term::Fluent(sea.init.clone(), args.to_vec(), Box::new(sit.clone()));
        let start = Term::Start(Box::new(sit.clone()));
        let at_start = Formula::and(vec![
            Formula::Eq(time.clone(), start.clone()),
            Formula::Eq(yt.clone(), init),
        ]);
        let (psi, mut note) = self.evolution(sea, args, time, sit, &yt)?;
        let later = Formula::and(vec![Formula::ne(time.clone(), start.clone()), psi]);
        let decision = simplify_with(&Formula::Eq(time.clone(), start), &self.ctx());
        let case = match decision {
            Formula::True => at_start,
            Formula::False => later,
            _ => {
                note = Some(match note {
                    Some(n) => {
                        format!("{n}; time vs start of situation undecided, both cases kept")
                    }
                    None => "time vs start of situation undecided, both cases kept".to_string(),
                });
                Formula::or(vec![at_start, later])
            }
        };
        Ok((case, note))
    }

    /// The evolution axiom's right-hand side, reduced to the applicable
    /// branch when the contexts can be decided.
    fn evolution(
        &self,
        sea: &crate::sea::Sea,
        args: &[Term],
        time: &Term,
        sit: &Term,
        y: &Term,
    ) -> Result<(Formula, Option<String>), RegressionError> {
        let full = sea.instantiate(args, time, y, sit);
        if self.mode == Mode::Symbolic {
            return Ok((full, None));
        }
        let n = sea.branches.len() + usize::from(sea.frame);
        let mut chosen = Vec::new();
        for i in 0..n {
            match self.decide(&sea.context_at(i, args, sit))? {
                Some(true) => chosen.push(i),
                Some(false) => {}
                None => return Ok((full, Some("context undecided, all branches kept".into()))),
            }
        }
        match chosen.as_slice() {
            [i] => {
                let label = if *i < sea.branches.len() {
                    format!("branch {}", i + 1)
                } else {
                    "frame branch".to_string()
                };
                Ok((
                    sea.law_at(*i, args, time, y, sit),
                    Some(format!("{label} selected")),
                ))
            }
            _ => Ok((full, Some("no unique branch, all kept".into()))),
        }
    }

    /// Truth of a context in the initial model after full regression.
    fn decide(&self, ctx: &Formula) -> Result<Option<bool>, RegressionError> {
        if !ctx.is_closed() {
            return Ok(None);
        }
        if let Some(v) = self.decided.lock().unwrap().get(ctx) {
            return Ok(*v);
        }
        let r = self.run(ctx, &Term::S0, None)?;
        let v = evaluate(&r, &self.compiled.model).ok();
        self.decided.lock().unwrap().insert(ctx.clone(), v);
        Ok(v)
    }
}

fn replace_atoms(f: &Formula, atom: &Formula, by: &Formula) -> Formula {
    if f == atom {
        return by.clone();
    }
    if f.is_atom() {
        return f.clone();
    }
    f.map_children(|c| replace_atoms(c, atom, by))
}

/// Regresses to `S0` in the default mode.
pub fn regress(w: &Formula, c: &Compiled) -> Result<Formula, RegressionError> {
    Ok(Regressor::new(c).regress(w)?.formula)
}

pub fn partial_regress(w: &Formula, stop: &Term, c: &Compiled) -> Result<Formula, RegressionError> {
    Ok(Regressor::new(c).regress_to(w, stop)?.formula)
}

/// `f` with the free situation variable `s` bound to `sit`.
pub fn at(f: &Formula, s: &Var, sit: &Term) -> Formula {
    let mut m = Subst::new();
    m.insert(s.clone(), sit.clone());
    subst_formula(f, &m)
}

/// Replaces `S0` in `f` by `sit`.
pub fn shift(f: &Formula, sit: &Term) -> Formula {
    replace(f, &Term::S0, sit)
}

#[cfg(test)]
mod tests;
