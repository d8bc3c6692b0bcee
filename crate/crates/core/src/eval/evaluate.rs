use thiserror::Error;

use super::model::InitialModel;
use crate::arith::{Lra, QeError};
use crate::logic::simplify::simplify_term_with;
use crate::logic::{simplify_with, Formula, Rat, SimplifyContext, Sort, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("sentence has free variables: {0}")]
    Open(String),
    #[error("cannot resolve `{0}` in the initial model (not uniform in S0)")]
    Unresolved(String),
    #[error("unsupported fragment: {0}")]
    Unsupported(#[from] QeError),
}

fn leftover_situational(f: &Formula) -> Option<String> {
    let mut found = None;
    f.any_term(&mut |t| {
        let hit = matches!(
            t,
            Term::Fluent(..) | Term::Temporal(..) | Term::Do(..) | Term::Start(_)
        );
        if hit {
            found = Some(t.to_string());
        }
        hit
    });
    if found.is_none() {
        f.any_atom(&mut |a| {
            let hit = matches!(
                a,
                Formula::Rel(..) | Formula::Poss(..) | Formula::Precedes(..)
            );
            if hit {
                found = Some(a.to_string());
            }
            hit
        });
    }
    found
}

/// Resolves everything known at S0 and eliminates object quantifiers over
/// their domains; what remains is pure real arithmetic.
pub fn ground(phi: &Formula, m: &InitialModel) -> Formula {
    simplify_with(&m.expand(phi), &SimplifyContext::full(m))
}

/// Truth value of a closed sentence uniform in S0 under the initial model.
pub fn evaluate(phi: &Formula, m: &InitialModel) -> Result<bool, EvalError> {
    if !phi.is_closed() {
        let names: Vec<String> = phi.free_vars().iter().map(|v| v.name.to_string()).collect();
        return Err(EvalError::Open(names.join(", ")));
    }
    let g = ground(phi, m);
    match g {
        Formula::True => return Ok(true),
        Formula::False => return Ok(false),
        _ => {}
    }
    if let Some(t) = leftover_situational(&g) {
        return Err(EvalError::Unresolved(t));
    }
    let mut bad = None;
    g.visit_binders(&mut |v| {
        if v.sort != Sort::Real {
            bad.get_or_insert_with(|| format!("{} {}", v.sort, v.name));
        }
    });
    if let Some(b) = bad {
        return Err(EvalError::Unsupported(QeError::Unsupported(b)));
    }
    Ok(Lra::new(m.object_valued.clone()).decide(&g)?)
}

/// Value of a ground real-valued term uniform in S0.
pub fn evaluate_term(t: &Term, m: &InitialModel) -> Result<Rat, EvalError> {
    match simplify_term_with(&m.expand_term(t), &SimplifyContext::full(m)) {
        Term::Num(r) => Ok(r),
        other => Err(EvalError::Unresolved(other.to_string())),
    }
}
