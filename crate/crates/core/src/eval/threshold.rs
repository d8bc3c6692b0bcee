//! Earliest time in an interval at which a linear condition holds.

use thiserror::Error;

use crate::arith::mpoly::MPoly;
use crate::arith::timeset::{self, Bound, TimeSetError};
use crate::logic::{Formula, Rat, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Threshold {
    /// Infimum of the satisfying times.
    pub value: Rat,
    /// Whether the condition holds at `value` itself.
    pub attained: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("`{0}` is not linear in the time variable")]
    Nonlinear(String),
    #[error("threshold is irrational: {0}")]
    Irrational(String),
    #[error(transparent)]
    TimeSet(#[from] TimeSetError),
}

pub(crate) fn check_linear_in(g: &Formula, t: &Var) -> Result<(), ThresholdError> {
    let tv = Term::var(t);
    let mut bad = None;
    g.any_atom(&mut |a| {
        let nonlinear = a
            .atom_terms()
            .iter()
            .any(|x| MPoly::from_term(x).degree_in(&tv) > 1);
        if nonlinear {
            bad = Some(a.to_string());
        }
        nonlinear
    });
    match bad {
        Some(a) => Err(ThresholdError::Nonlinear(a)),
        None => Ok(()),
    }
}

/// The infimum of `{t ∈ [lo, hi] | g}`, or `None` when empty. `g` must be
/// quantifier-free with `t` as its only unknown.
pub fn solve_threshold(
    g: &Formula,
    t: &Var,
    lo: &Rat,
    hi: &Rat,
) -> Result<Option<Threshold>, ThresholdError> {
    check_linear_in(g, t)?;
    let set = timeset::solve(g, t, Some(lo), Some(hi))?;
    let Some((bound, closed)) = set.infimum() else {
        return Ok(None);
    };
    match bound {
        Bound::At(r) => match r.as_rat() {
            Some(v) => Ok(Some(Threshold {
                value: v.clone(),
                attained: closed,
            })),
            None => Err(ThresholdError::Irrational(r.to_string())),
        },
        other => Err(ThresholdError::Irrational(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;
    use crate::logic::rat;

    fn f(src: &str) -> Formula {
        let th = crate::dsl::Theory::default();
        crate::dsl::elaborate::elaborate_formula(
            &th,
            &parse_expr(src).unwrap(),
            Term::S0,
            vec![Var::real("t")],
        )
        .unwrap()
    }

    #[test]
    fn strict_inequality_infimum_is_not_attained() {
        let th = solve_threshold(
            &f("100 - 10 * (t - 1) < 95"),
            &Var::real("t"),
            &rat(1),
            &rat(2),
        )
        .unwrap()
        .unwrap();
        assert_eq!(
            th,
            Threshold {
                value: crate::logic::ratio(3, 2),
                attained: false
            }
        );
    }

    #[test]
    fn lower_bound_and_empty() {
        let t = Var::real("t");
        let th = solve_threshold(&f("t >= 4"), &t, &rat(4), &rat(9))
            .unwrap()
            .unwrap();
        assert_eq!(
            th,
            Threshold {
                value: rat(4),
                attained: true
            }
        );
        assert_eq!(
            solve_threshold(&f("0 * t + 1 < 0"), &t, &rat(0), &rat(9)).unwrap(),
            None
        );
        let square = Formula::lt(Term::mul(Term::var(&t), Term::var(&t)), Term::int(2));
        assert!(matches!(
            solve_threshold(&square, &t, &rat(0), &rat(9)),
            Err(ThresholdError::Nonlinear(_))
        ));
    }
}
