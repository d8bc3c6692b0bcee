//! Basic hybrid automata, their encoding as temporal action theories and
//! trajectories.

pub mod format;
pub mod trajectory;
pub mod translate;

#[cfg(test)]
mod tests;

use std::collections::BTreeSet;

use crate::arith::mpoly::MPoly;
use crate::dsl::theory::Diagnostic;
use crate::logic::{subst_formula, subst_term, Formula, Rat, Subst, Symbol, Term, Var};

pub use format::{parse_ha, print_ha};
pub use trajectory::{
    build_trajectory, check_invariance, check_trajectory, first_enabled, Condition, Duration,
    InvarianceReport, Segment, Trajectory, TrajectoryError, Violation,
};
pub use translate::{ha_to_tbat, trans_action, translate};

/// Names the translation uses for its own symbols and variables.
pub const RESERVED: [&str; 15] = [
    "t", "q", "q1", "q2", "Q", "Edge", "Inv", "Reset", "Init", "trans", "state", "start", "S0",
    "true", "false",
];

/// Prefixes of generated names.
pub const RESERVED_PREFIXES: [&str; 3] = ["X_", "y_", "flow_"];

/// A transition with a guard over the continuous state and a deterministic
/// reset, one expression per coordinate over the values before the jump.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: Symbol,
    pub to: Symbol,
    pub guard: Formula,
    pub reset: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HybridAutomaton {
    pub name: String,
    pub states: Vec<Symbol>,
    /// Coordinates of the continuous state.
    pub vars: Vec<Var>,
    /// Per state, one expression per coordinate in the coordinates (the
    /// values on entry) and the elapsed time `t`.
    pub flows: Vec<(Symbol, Vec<Term>)>,
    pub invariants: Vec<(Symbol, Formula)>,
    pub edges: Vec<Edge>,
    pub init: Vec<(Symbol, Formula)>,
    /// The concrete initial state of the encoded theory.
    pub start: (Symbol, Vec<Rat>),
}

/// Maximum degree in `t` of a flow.
pub const MAX_FLOW_DEGREE: u32 = 2;

impl HybridAutomaton {
    pub fn elapsed() -> Var {
        Var::real("t")
    }

    pub fn flow(&self, q: &str) -> Option<&[Term]> {
        self.flows
            .iter()
            .find(|(s, _)| s == q)
            .map(|(_, f)| f.as_slice())
    }

    /// `Inv_q`; states without a declared invariant are unconstrained.
    pub fn invariant(&self, q: &str) -> Formula {
        self.invariants
            .iter()
            .find(|(s, _)| s == q)
            .map_or(Formula::True, |(_, f)| f.clone())
    }

    pub fn init_of(&self, q: &str) -> Formula {
        Formula::or(
            self.init
                .iter()
                .filter(|(s, _)| s == q)
                .map(|(_, f)| f.clone())
                .collect(),
        )
    }

    pub fn has_state(&self, q: &str) -> bool {
        self.states.iter().any(|s| s == q)
    }

    fn point_subst(&self, x: &[Term]) -> Subst {
        self.vars.iter().cloned().zip(x.iter().cloned()).collect()
    }

    /// The flow of `q` from point `x0`, as expressions in the elapsed time.
    pub fn curve(&self, q: &str, x0: &[Rat]) -> Option<Vec<Term>> {
        let x0: Vec<Term> = x0.iter().cloned().map(Term::Num).collect();
        let s = self.point_subst(&x0);
        Some(self.flow(q)?.iter().map(|e| subst_term(e, &s)).collect())
    }

    /// `f` with the coordinates replaced by `x`.
    pub fn at_point(&self, f: &Formula, x: &[Term]) -> Formula {
        subst_formula(f, &self.point_subst(x))
    }

    pub fn reset_at(&self, e: &Edge, x: &[Term]) -> Vec<Term> {
        let s = self.point_subst(x);
        e.reset.iter().map(|r| subst_term(r, &s)).collect()
    }

    /// Structural checks: names, edge endpoints, complete flows that start
    /// at their entry point and stay within the supported degree.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut err =
            |code: &'static str, msg: String| out.push(Diagnostic::error(code, msg, None));
        let mut seen = BTreeSet::new();
        for n in self.states.iter().chain(self.vars.iter().map(|v| &v.name)) {
            if RESERVED.contains(&n.as_str()) || RESERVED_PREFIXES.iter().any(|p| n.starts_with(p))
            {
                err(
                    "reserved-name",
                    format!("`{n}` is reserved by the translation"),
                );
            }
            if !seen.insert(n.clone()) {
                err("duplicate", format!("`{n}` is declared twice"));
            }
        }
        if self.states.is_empty() {
            err("no-states", "an automaton needs at least one state".into());
        }
        let t = Self::elapsed();
        for q in &self.states {
            let Some(flow) = self.flow(q) else {
                err("missing-flow", format!("state `{q}` has no flow"));
                continue;
            };
            for (v, e) in self.vars.iter().zip(flow) {
                let p = MPoly::from_term(e);
                if p.degree_in(&Term::var(&t)) > MAX_FLOW_DEGREE {
                    err(
                        "flow-degree",
                        format!("flow of `{v}` in `{q}` has degree above {MAX_FLOW_DEGREE} in t"),
                    );
                }
                let mut at0 = Subst::new();
                at0.insert(t.clone(), Term::int(0));
                if !MPoly::from_term(&subst_term(e, &at0))
                    .sub(&MPoly::from_term(&Term::var(v)))
                    .is_zero()
                {
                    err(
                        "flow-origin",
                        format!("flow of `{v}` in `{q}` does not start at `{v}` when t = 0"),
                    );
                }
            }
        }
        for q in self
            .flows
            .iter()
            .map(|(q, _)| q)
            .chain(self.invariants.iter().map(|(q, _)| q))
        {
            if !self.has_state(q) {
                err("unknown-state", format!("`{q}` is not a state"));
            }
        }
        for e in &self.edges {
            for q in [&e.from, &e.to] {
                if !self.has_state(q) {
                    err(
                        "unknown-state",
                        format!("edge endpoint `{q}` is not a state"),
                    );
                }
            }
        }
        for (q, _) in &self.init {
            if !self.has_state(q) {
                err(
                    "unknown-state",
                    format!("initial state `{q}` is not a state"),
                );
            }
        }
        let (q0, x0) = &self.start;
        if !self.has_state(q0) {
            err(
                "unknown-state",
                format!("start state `{q0}` is not a state"),
            );
        }
        if x0.len() != self.vars.len() {
            err(
                "start",
                format!(
                    "start point has {} values for {} coordinates",
                    x0.len(),
                    self.vars.len()
                ),
            );
        }
        out
    }
}
