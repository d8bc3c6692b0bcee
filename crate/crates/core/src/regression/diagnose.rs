//! Attributing the truth of a timed query to an action of a narrative.

use thiserror::Error;

use super::{at, RegressionError, Regressor};
use crate::arith::timeset::{self, Bound, TimeSet, TimeSetError};
use crate::eval::threshold::{check_linear_in, ThresholdError};
use crate::eval::{ground, EvalError};
use crate::logic::{Formula, Rat, Term, Var};
use crate::sea::Compiled;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnoseError {
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    TimeSet(#[from] TimeSetError),
    #[error("invalid narrative: {0}")]
    Narrative(String),
}

/// The query's truth over the interval of one prefix of the narrative.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixVerdict {
    /// The last action of the prefix; `None` for `S0`.
    pub action: Option<Term>,
    pub situation: Term,
    pub start: Rat,
    pub end: Rat,
    /// Times in `[start, end]` at which the query holds.
    pub holds: TimeSet,
    pub at_end: bool,
    pub throughout: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Attribution {
    /// The query holds from the start of `S0` to the horizon.
    InitiallyTrue,
    /// The query becomes true `elapsed` after the start of prefix `index`
    /// and stays true to the horizon. `action` is the prefix's last action,
    /// `None` when the change happens in `S0` by the passage of time alone.
    Action {
        index: usize,
        action: Option<Term>,
        elapsed: Rat,
        attained: bool,
    },
    /// True somewhere but not at the horizon.
    FalseAtHorizon,
    /// False at every prefix.
    NeverTrue,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosisReport {
    pub prefixes: Vec<PrefixVerdict>,
    pub attribution: Attribution,
}

fn rational(b: &Bound) -> Result<Rat, DiagnoseError> {
    b.as_rat()
        .cloned()
        .ok_or_else(|| DiagnoseError::Threshold(ThresholdError::Irrational(b.to_string())))
}

fn action_time(a: &Term) -> Result<Rat, DiagnoseError> {
    match a {
        Term::Action { time, .. } => match time.as_num() {
            Some(r) => Ok(r.clone()),
            None => Err(DiagnoseError::Narrative(format!(
                "time of `{a}` is not a number"
            ))),
        },
        _ => Err(DiagnoseError::Narrative(format!("`{a}` is not an action"))),
    }
}

/// Evaluates `w` (free in `time` and `sit`) over every prefix of the
/// narrative: on `[start(σj), time(α(j+1))]` for inner prefixes and on
/// `[start(σn), horizon]` for the whole narrative. The horizon defaults to
/// the time of the last action.
pub fn diagnose(
    w: &Formula,
    time: &Var,
    sit: &Var,
    narrative: &[Term],
    horizon: Option<Rat>,
    c: &Compiled,
) -> Result<DiagnosisReport, DiagnoseError> {
    let regressor = Regressor::new(c);
    let mut starts = vec![c.model.start.clone()];
    for a in narrative {
        let t = action_time(a)?;
        if &t < starts.last().unwrap() {
            return Err(DiagnoseError::Narrative(format!(
                "`{a}` occurs before the previous action"
            )));
        }
        starts.push(t);
    }
    let last = starts.last().unwrap().clone();
    let horizon = horizon.unwrap_or_else(|| last.clone());
    if horizon < last {
        return Err(DiagnoseError::Narrative(format!(
            "horizon is before the last action time {last}"
        )));
    }

    let mut prefixes = Vec::new();
    let mut situation = Term::S0;
    for j in 0..=narrative.len() {
        if j > 0 {
            situation = Term::do_(narrative[j - 1].clone(), situation);
        }
        let start = starts[j].clone();
        let end = starts
            .get(j + 1)
            .cloned()
            .unwrap_or_else(|| horizon.clone());
        let r = regressor.regress(&at(w, sit, &situation))?.formula;
        let g = ground(&r, &c.model);
        check_linear_in(&g, time)?;
        let holds = timeset::solve(&g, time, Some(&start), Some(&end))?;
        let at_end = holds.contains(&end);
        let throughout = match holds.intervals.as_slice() {
            [i] => {
                i.lo_closed
                    && i.hi_closed
                    && i.lo.as_rat() == Some(&start)
                    && i.hi.as_rat() == Some(&end)
            }
            _ => false,
        };
        prefixes.push(PrefixVerdict {
            action: j.checked_sub(1).map(|k| narrative[k].clone()),
            situation: situation.clone(),
            start,
            end,
            holds,
            at_end,
            throughout,
        });
    }

    let attribution = attribute(&prefixes)?;
    Ok(DiagnosisReport {
        prefixes,
        attribution,
    })
}

fn attribute(prefixes: &[PrefixVerdict]) -> Result<Attribution, DiagnoseError> {
    let n = prefixes.len() - 1;
    if !prefixes[n].at_end {
        return Ok(if prefixes.iter().all(|p| p.holds.is_empty()) {
            Attribution::NeverTrue
        } else {
            Attribution::FalseAtHorizon
        });
    }
    let mut j = n;
    loop {
        let p = &prefixes[j];
        let iv = p
            .holds
            .interval_containing(&p.end)
            .expect("query holds at the end of the prefix");
        let lo = rational(&iv.lo)?;
        let from_start = lo == p.start && iv.lo_closed;
        if !from_start {
            return Ok(Attribution::Action {
                index: j,
                action: p.action.clone(),
                elapsed: lo - &p.start,
                attained: iv.lo_closed,
            });
        }
        if j == 0 {
            return Ok(Attribution::InitiallyTrue);
        }
        if !prefixes[j - 1].at_end {
            return Ok(Attribution::Action {
                index: j,
                action: p.action.clone(),
                elapsed: Rat::from_integer(0.into()),
                attained: true,
            });
        }
        j -= 1;
    }
}
