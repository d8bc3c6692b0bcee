//! Trajectories built from narratives of the encoding, checked against the
//! automaton directly, and invariance checked through regression.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use super::translate::coordinate_fluent;
use super::{Edge, HybridAutomaton};
use crate::arith::timeset::{self, TimeSet, TimeSetError};
use crate::arith::Lra;
use crate::dsl::theory::init_name;
use crate::eval::{evaluate, ground, EvalError, Simulation, SimulationError};
use crate::logic::simplify::simplify_term;
use crate::logic::{format_rat, rat, simplify, subst_term, Formula, Rat, Subst, Symbol, Term, Var};
use crate::regression::{RegressionError, Regressor};
use crate::sea::Compiled;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Duration {
    Finite(Rat),
    Infinite,
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Duration::Finite(r) => f.write_str(&format_rat(r)),
            Duration::Infinite => f.write_str("inf"),
        }
    }
}

/// `⟨Δ, q, ν⟩` with the curve given by the flow of `state` from `entry`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub duration: Duration,
    pub state: Symbol,
    pub entry: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            writeln!(
                f,
                "{}: delta = {}, q = {}, entry = ({})",
                i + 1,
                s.duration,
                s.state,
                s.entry.iter().map(format_rat).join(", ")
            )?;
        }
        Ok(())
    }
}

/// The defining conditions of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    /// Durations are nonnegative; only the last may be infinite.
    Durations,
    /// Every state belongs to the automaton.
    States,
    /// Every curve stays inside the invariant of its state.
    Invariant,
    /// The first state and entry point are initial.
    Initial,
    /// Consecutive segments are joined by an edge and its reset.
    Junction,
}

impl Condition {
    pub fn label(self) -> char {
        match self {
            Condition::Durations => 'a',
            Condition::States => 'b',
            Condition::Invariant => 'c',
            Condition::Initial => 'd',
            Condition::Junction => 'e',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    /// Zero-based segment index.
    pub index: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition ({}) fails at segment {}: {}",
            self.condition.label(),
            self.index + 1,
            self.detail
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    TimeSet(#[from] TimeSetError),
    #[error("`{0}` is not a transition of the encoding")]
    Foreign(String),
    #[error("end time {tau} is before the start {start} of the last situation")]
    Horizon { tau: String, start: String },
}

fn t_var() -> Var {
    HybridAutomaton::elapsed()
}

fn decide(f: &Formula) -> bool {
    match simplify(f) {
        Formula::True => true,
        Formula::False => false,
        g => Lra::default().decide(&g).unwrap_or(false),
    }
}

fn num(t: &Term) -> Option<Rat> {
    simplify_term(t).as_num().cloned()
}

/// The continuous state reached after `dt` in `q` from `entry`.
pub fn point_at(h: &HybridAutomaton, q: &str, entry: &[Rat], dt: &Rat) -> Option<Vec<Rat>> {
    let mut at = Subst::new();
    at.insert(t_var(), Term::Num(dt.clone()));
    h.curve(q, entry)?
        .iter()
        .map(|e| num(&subst_term(e, &at)))
        .collect()
}

/// The point an edge resets `x` to.
pub fn reset_point(h: &HybridAutomaton, e: &Edge, x: &[Rat]) -> Option<Vec<Rat>> {
    let x: Vec<Term> = x.iter().cloned().map(Term::Num).collect();
    h.reset_at(e, &x).iter().map(num).collect()
}

/// Earliest elapsed time at which the guard of `e` holds along the flow of
/// its source state from `entry`, when attained at a rational time.
pub fn first_enabled(h: &HybridAutomaton, e: &Edge, entry: &[Rat]) -> Option<Rat> {
    let curve = h.curve(&e.from, entry)?;
    let g = simplify(&h.at_point(&e.guard, &curve));
    let set = timeset::solve(&g, &t_var(), Some(&rat(0)), None).ok()?;
    match set.infimum()? {
        (b, true) => b.as_rat().cloned(),
        _ => None,
    }
}

fn transition_of(h: &HybridAutomaton, a: &Term) -> Result<Rat, TrajectoryError> {
    match a {
        Term::Action {
            functor,
            args,
            time,
        } if functor == "trans" && args.len() == 2 + h.vars.len() => time
            .as_num()
            .cloned()
            .ok_or_else(|| TrajectoryError::Foreign(a.to_string())),
        _ => Err(TrajectoryError::Foreign(a.to_string())),
    }
}

/// The trajectory read off a narrative of the encoding: durations from
/// consecutive action times (the last one ending at `tau`), states and
/// entry points from the simulated values of `Q` and the init fluents.
pub fn build_trajectory(
    h: &HybridAutomaton,
    c: &Compiled,
    narrative: &[Term],
    tau: &Rat,
) -> Result<Trajectory, TrajectoryError> {
    let times = narrative
        .iter()
        .map(|a| transition_of(h, a))
        .collect::<Result<Vec<_>, _>>()?;
    let sim = Simulation::run(c, narrative)?;
    let q = Symbol::new("Q");
    let mut segments = Vec::new();
    for (j, state) in sim.states.iter().enumerate() {
        let end = times.get(j).unwrap_or(tau);
        if j == sim.last() && tau < &state.start {
            return Err(TrajectoryError::Horizon {
                tau: format_rat(tau),
                start: format_rat(&state.start),
            });
        }
        let Some(Term::Obj(qj)) = state.value(&q, &[]) else {
            return Err(TrajectoryError::Foreign("Q has no value".into()));
        };
        let entry = h
            .vars
            .iter()
            .map(|v| {
                match state.value(&Symbol::new(&init_name(&coordinate_fluent(&v.name))), &[]) {
                    Some(Term::Num(r)) => Ok(r.clone()),
                    _ => Err(TrajectoryError::Foreign(format!(
                        "no entry value for `{}`",
                        v.name
                    ))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        segments.push(Segment {
            duration: Duration::Finite(end - &state.start),
            state: qj.clone(),
            entry,
        });
    }
    Ok(Trajectory { segments })
}

/// Checks the defining conditions segment by segment and returns the
/// first violation.
pub fn check_trajectory(h: &HybridAutomaton, eta: &Trajectory) -> Result<(), Violation> {
    let fail = |condition, index, detail: String| {
        Err(Violation {
            condition,
            index,
            detail,
        })
    };
    let n = eta.segments.len();
    if n == 0 {
        return fail(Condition::Durations, 0, "empty trajectory".into());
    }
    for (i, s) in eta.segments.iter().enumerate() {
        match &s.duration {
            Duration::Finite(d) if d < &rat(0) => {
                return fail(
                    Condition::Durations,
                    i,
                    format!("negative duration {}", format_rat(d)),
                )
            }
            Duration::Infinite if i + 1 < n => {
                return fail(
                    Condition::Durations,
                    i,
                    "infinite duration before the last segment".into(),
                )
            }
            _ => {}
        }
        if !h.has_state(&s.state) || s.entry.len() != h.vars.len() {
            return fail(
                Condition::States,
                i,
                format!("`{}` is not a state of the automaton", s.state),
            );
        }
        let curve = h.curve(&s.state, &s.entry).expect("state checked");
        let inside = h.at_point(&h.invariant(&s.state), &curve);
        let hi = match &s.duration {
            Duration::Finite(d) => Some(d),
            Duration::Infinite => None,
        };
        let outside = timeset::solve(
            &simplify(&Formula::not(inside)),
            &t_var(),
            Some(&rat(0)),
            hi,
        )
        .map_err(|e| Violation {
            condition: Condition::Invariant,
            index: i,
            detail: e.to_string(),
        })?;
        if !outside.is_empty() {
            return fail(
                Condition::Invariant,
                i,
                format!(
                    "curve leaves the invariant of `{}` at elapsed times {outside}",
                    s.state
                ),
            );
        }
        if i == 0 {
            let x0: Vec<Term> = s.entry.iter().cloned().map(Term::Num).collect();
            if !decide(&h.at_point(&h.init_of(&s.state), &x0)) {
                return fail(
                    Condition::Initial,
                    0,
                    format!(
                        "`{}` at ({}) is not initial",
                        s.state,
                        s.entry.iter().map(format_rat).join(", ")
                    ),
                );
            }
        }
        if i + 1 < n {
            let Duration::Finite(d) = &s.duration else {
                unreachable!("checked above")
            };
            let next = &eta.segments[i + 1];
            let end = point_at(h, &s.state, &s.entry, d).expect("state checked");
            let end_t: Vec<Term> = end.iter().cloned().map(Term::Num).collect();
            let edges: Vec<&Edge> = h
                .edges
                .iter()
                .filter(|e| e.from == s.state && e.to == next.state)
                .collect();
            if edges.is_empty() {
                return fail(
                    Condition::Junction,
                    i,
                    format!("no edge from `{}` to `{}`", s.state, next.state),
                );
            }
            let ok = edges.iter().any(|e| {
                decide(&h.at_point(&e.guard, &end_t))
                    && reset_point(h, e, &end).as_deref() == Some(&next.entry[..])
            });
            if !ok {
                return fail(
                    Condition::Junction,
                    i,
                    format!(
                        "no reset from `{}` to `{}` takes ({}) to ({})",
                        s.state,
                        next.state,
                        end.iter().map(format_rat).join(", "),
                        next.entry.iter().map(format_rat).join(", ")
                    ),
                );
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub initial: bool,
    /// First prefix whose interval leaves the invariant, with the times.
    pub violation: Option<(usize, TimeSet)>,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.initial && self.violation.is_none()
    }
}

/// Evaluates `Init(Q(S0), X_init(S0))` and `Inv(Q(σj), X(t, σj))` on every
/// interval of the narrative, the last one ending at `tau`, by regression
/// in the encoding.
pub fn check_invariance(
    h: &HybridAutomaton,
    c: &Compiled,
    narrative: &[Term],
    tau: &Rat,
) -> Result<InvarianceReport, TrajectoryError> {
    let times = narrative
        .iter()
        .map(|a| transition_of(h, a))
        .collect::<Result<Vec<_>, _>>()?;
    let regressor = Regressor::new(c);
    let q_at = |s: &Term| Term::Fluent(Symbol::new("Q"), Vec::new(), Box::new(s.clone()));
    let mut init_args = vec![q_at(&Term::S0)];
    init_args.extend(h.vars.iter().map(|v| {
        Term::Fluent(
            Symbol::new(&init_name(&coordinate_fluent(&v.name))),
            Vec::new(),
            Box::new(Term::S0),
        )
    }));
    let initial = evaluate(&Formula::pred("Init", init_args), &c.model)?;

    let t = t_var();
    let mut sit = Term::S0;
    let mut start = c.model.start.clone();
    let mut violation = None;
    for j in 0..=narrative.len() {
        if j > 0 {
            sit = Term::do_(narrative[j - 1].clone(), sit);
            start = times[j - 1].clone();
        }
        let end = times.get(j).unwrap_or(tau);
        if end < &start {
            return Err(TrajectoryError::Horizon {
                tau: format_rat(end),
                start: format_rat(&start),
            });
        }
        let mut args = vec![q_at(&sit)];
        args.extend(h.vars.iter().map(|v| {
            Term::temporal(
                &coordinate_fluent(&v.name),
                Vec::new(),
                Term::var(&t),
                sit.clone(),
            )
        }));
        let w = Formula::pred("Inv", args);
        let r = regressor.regress(&w)?.formula;
        let outside = timeset::solve(
            &ground(&Formula::not(r), &c.model),
            &t,
            Some(&start),
            Some(end),
        )?;
        if !outside.is_empty() {
            violation = Some((j, outside));
            break;
        }
    }
    Ok(InvarianceReport { initial, violation })
}
