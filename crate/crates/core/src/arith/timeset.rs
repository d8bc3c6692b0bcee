//! Exact solution sets of quantifier-free conditions in one real variable,
//! computed by a sign-invariant decomposition of the line at the real roots
//! of every atom's polynomial.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use super::mpoly::MPoly;
use super::upoly::{Real, UPoly};
use crate::logic::{rat, CmpOp, Formula, Rat, Term, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TimeSetError {
    #[error("not a polynomial in {var}: {term}")]
    NonPolynomial { var: String, term: String },
    #[error("atom cannot be decided as a condition on {var}: {atom}")]
    Undecided { var: String, atom: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    NegInf,
    PosInf,
    At(Real),
}

impl Bound {
    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Bound::At(r) => r.as_rat(),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("inf"),
            Bound::At(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub lo_closed: bool,
    pub hi: Bound,
    pub hi_closed: bool,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A finite union of disjoint, non-adjacent intervals in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TimeSet {
    pub intervals: Vec<Interval>,
}

impl fmt::Display for TimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(" u "))
    }
}

fn cmp_bound_rat(b: &Bound, r: &Rat) -> Ordering {
    match b {
        Bound::NegInf => Ordering::Less,
        Bound::PosInf => Ordering::Greater,
        Bound::At(x) => x.cmp_rat(r),
    }
}

impl TimeSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Infimum of the set and whether it belongs to the set.
    pub fn infimum(&self) -> Option<(Bound, bool)> {
        self.intervals.first().map(|i| (i.lo.clone(), i.lo_closed))
    }

    pub fn contains(&self, r: &Rat) -> bool {
        self.intervals.iter().any(|i| {
            let lo = cmp_bound_rat(&i.lo, r);
            let hi = cmp_bound_rat(&i.hi, r);
            (lo == Ordering::Less || (lo == Ordering::Equal && i.lo_closed))
                && (hi == Ordering::Greater || (hi == Ordering::Equal && i.hi_closed))
        })
    }

    /// The only element, when the set is a single rational point.
    pub fn as_point(&self) -> Option<&Rat> {
        match self.intervals.as_slice() {
            [i] if i.lo_closed && i.hi_closed && i.lo == i.hi => i.lo.as_rat(),
            _ => None,
        }
    }

    /// The interval containing `r`, if any.
    pub fn interval_containing(&self, r: &Rat) -> Option<&Interval> {
        self.intervals.iter().find(|i| {
            TimeSet {
                intervals: vec![(*i).clone()],
            }
            .contains(r)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Rel {
    Lt,
    Le,
    Eq,
}

enum BoolExpr {
    Const(bool),
    Atom(usize),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    fn eval(&self, atoms: &[bool]) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Atom(i) => atoms[*i],
            BoolExpr::Not(e) => !e.eval(atoms),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(atoms)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(atoms)),
        }
    }
}

struct Compiler<'a> {
    var: &'a Var,
    atoms: Vec<(UPoly, Rel)>,
}

impl Compiler<'_> {
    fn poly(&self, t: &Term) -> Result<UPoly, TimeSetError> {
        MPoly::from_term(t)
            .to_upoly(&Term::Var(self.var.clone()))
            .ok_or_else(|| TimeSetError::NonPolynomial {
                var: self.var.name.to_string(),
                term: t.to_string(),
            })
    }

    fn atom(&mut self, p: UPoly, rel: Rel) -> BoolExpr {
        if p.degree().unwrap_or(0) == 0 {
            let c = p.coeffs().first().cloned().unwrap_or_default();
            let zero = Rat::default();
            return BoolExpr::Const(match rel {
                Rel::Lt => c < zero,
                Rel::Le => c <= zero,
                Rel::Eq => c == zero,
            });
        }
        self.atoms.push((p, rel));
        BoolExpr::Atom(self.atoms.len() - 1)
    }

    fn compile(&mut self, f: &Formula) -> Result<BoolExpr, TimeSetError> {
        Ok(match f {
            Formula::True => BoolExpr::Const(true),
            Formula::False => BoolExpr::Const(false),
            Formula::Not(g) => BoolExpr::Not(Box::new(self.compile(g)?)),
            Formula::And(fs) => BoolExpr::And(
                fs.iter()
                    .map(|g| self.compile(g))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Or(fs) => BoolExpr::Or(
                fs.iter()
                    .map(|g| self.compile(g))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Implies(a, b) => BoolExpr::Or(vec![
                BoolExpr::Not(Box::new(self.compile(a)?)),
                self.compile(b)?,
            ]),
            Formula::Iff(a, b) => {
                let (x, y, nx, ny) = (
                    self.compile(a)?,
                    self.compile(b)?,
                    self.compile(a)?,
                    self.compile(b)?,
                );
                BoolExpr::Or(vec![
                    BoolExpr::And(vec![x, y]),
                    BoolExpr::And(vec![
                        BoolExpr::Not(Box::new(nx)),
                        BoolExpr::Not(Box::new(ny)),
                    ]),
                ])
            }
            Formula::Cmp(op, a, b) => {
                let p = self.poly(a)?.sub(&self.poly(b)?);
                self.atom(p, if *op == CmpOp::Lt { Rel::Lt } else { Rel::Le })
            }
            Formula::Eq(a, b) => match (self.poly(a), self.poly(b)) {
                (Ok(x), Ok(y)) => self.atom(x.sub(&y), Rel::Eq),
                _ => {
                    return Err(TimeSetError::Undecided {
                        var: self.var.name.to_string(),
                        atom: f.to_string(),
                    })
                }
            },
            other => {
                return Err(TimeSetError::Undecided {
                    var: self.var.name.to_string(),
                    atom: other.to_string(),
                })
            }
        })
    }
}

fn truth_at(expr: &BoolExpr, atoms: &[(UPoly, Rel)], x: &Real) -> bool {
    let vals: Vec<bool> = atoms
        .iter()
        .map(|(p, rel)| {
            let s = x.sign_of(p);
            match rel {
                Rel::Lt => s < 0,
                Rel::Le => s <= 0,
                Rel::Eq => s == 0,
            }
        })
        .collect();
    expr.eval(&vals)
}

enum Cell {
    Point(Real),
    /// Open cell between two consecutive points (`None` = unbounded).
    Open(Option<Real>, Option<Real>),
}

/// The set of values of `var` in `[lo, hi]` (unbounded where `None`)
/// satisfying the quantifier-free `f`, whose atoms must be polynomial in
/// `var` with rational coefficients.
pub fn solve(
    f: &Formula,
    var: &Var,
    lo: Option<&Rat>,
    hi: Option<&Rat>,
) -> Result<TimeSet, TimeSetError> {
    if let (Some(l), Some(h)) = (lo, hi) {
        if l > h {
            return Ok(TimeSet::default());
        }
    }
    let mut c = Compiler {
        var,
        atoms: Vec::new(),
    };
    let expr = c.compile(f)?;
    let atoms = c.atoms;

    let in_domain = |r: &Real| {
        lo.is_none_or(|l| r.cmp_rat(l) != Ordering::Less)
            && hi.is_none_or(|h| r.cmp_rat(h) != Ordering::Greater)
    };
    let mut pts: Vec<Real> = Vec::new();
    for (p, _) in &atoms {
        pts.extend(p.real_roots().into_iter().filter(in_domain));
    }
    pts.extend(lo.map(|l| Real::Rat(l.clone())));
    pts.extend(hi.map(|h| Real::Rat(h.clone())));
    pts.sort_by(|a, b| a.cmp_real(b));
    pts.dedup_by(|a, b| a.cmp_real(b) == Ordering::Equal);

    let mut cells = Vec::new();
    if lo.is_none() {
        cells.push(Cell::Open(None, pts.first().cloned()));
    }
    for (i, p) in pts.iter().enumerate() {
        cells.push(Cell::Point(p.clone()));
        if let Some(q) = pts.get(i + 1) {
            cells.push(Cell::Open(Some(p.clone()), Some(q.clone())));
        }
    }
    if hi.is_none() && !pts.is_empty() {
        cells.push(Cell::Open(pts.last().cloned(), None));
    }

    let mut out: Vec<Interval> = Vec::new();
    let mut run: Option<(Bound, bool)> = None;
    let mut last_point: Option<Real> = None;
    for cell in &cells {
        let (truth, left) = match cell {
            Cell::Point(p) => (truth_at(&expr, &atoms, p), (Bound::At(p.clone()), true)),
            Cell::Open(a, b) => {
                let sample = match (a, b) {
                    (Some(a), Some(b)) => a.rational_between(b),
                    (Some(a), None) => a.ceil_rat() + rat(1),
                    (None, Some(b)) => b.floor_rat() - rat(1),
                    (None, None) => rat(0),
                };
                let left = a.clone().map(Bound::At).unwrap_or(Bound::NegInf);
                (truth_at(&expr, &atoms, &Real::Rat(sample)), (left, false))
            }
        };
        match (truth, &run) {
            (true, None) => run = Some(left),
            (false, Some((start, closed))) => {
                let (hi_b, hi_closed) = match cell {
                    Cell::Point(p) => (Bound::At(p.clone()), false),
                    Cell::Open(..) => (
                        Bound::At(last_point.clone().expect("open cell follows a point")),
                        true,
                    ),
                };
                out.push(Interval {
                    lo: start.clone(),
                    lo_closed: *closed,
                    hi: hi_b,
                    hi_closed,
                });
                run = None;
            }
            _ => {}
        }
        if let Cell::Point(p) = cell {
            last_point = Some(p.clone());
        }
    }
    if let Some((start, closed)) = run {
        let (hi_b, hi_closed) = match cells.last() {
            Some(Cell::Point(p)) => (Bound::At(p.clone()), true),
            _ => (Bound::PosInf, false),
        };
        out.push(Interval {
            lo: start,
            lo_closed: closed,
            hi: hi_b,
            hi_closed,
        });
    }
    Ok(TimeSet { intervals: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ratio;

    fn t() -> Var {
        Var::real("t")
    }
    fn tt() -> Term {
        Term::var(&t())
    }

    #[test]
    fn strict_threshold_has_open_infimum() {
        // 100 − 10·(t − 1) < 95 on [1, 2]
        let g = Formula::lt(
            Term::sub(
                Term::int(100),
                Term::mul(Term::int(10), Term::sub(tt(), Term::int(1))),
            ),
            Term::int(95),
        );
        let s = solve(&g, &t(), Some(&rat(1)), Some(&rat(2))).unwrap();
        let (inf, attained) = s.infimum().unwrap();
        assert_eq!(inf, Bound::At(Real::Rat(ratio(3, 2))));
        assert!(!attained);
        assert!(s.contains(&rat(2)));
        assert!(!s.contains(&ratio(3, 2)));
    }

    #[test]
    fn unsatisfiable_and_trivial() {
        let g = Formula::lt(
            Term::add(Term::mul(Term::int(0), tt()), Term::int(1)),
            Term::int(0),
        );
        assert!(solve(&g, &t(), Some(&rat(0)), Some(&rat(5)))
            .unwrap()
            .is_empty());
        let lo = Formula::le(Term::int(2), tt());
        let s = solve(&lo, &t(), Some(&rat(2)), Some(&rat(4))).unwrap();
        assert_eq!(s.infimum(), Some((Bound::At(Real::Rat(rat(2))), true)));
    }

    #[test]
    fn quadratic_with_irrational_roots() {
        // t² < 2, unbounded domain
        let g = Formula::lt(Term::mul(tt(), tt()), Term::int(2));
        let s = solve(&g, &t(), None, None).unwrap();
        assert_eq!(s.intervals.len(), 1);
        assert!(s.contains(&rat(1)));
        assert!(!s.contains(&ratio(3, 2)));
        assert!(!s.intervals[0].lo_closed);
    }

    #[test]
    fn isolated_points_and_unions() {
        // t = 1 ∨ t >= 3 over [0, 5]
        let g = Formula::or(vec![
            Formula::eq(tt(), Term::int(1)),
            Formula::le(Term::int(3), tt()),
        ]);
        let s = solve(&g, &t(), Some(&rat(0)), Some(&rat(5))).unwrap();
        assert_eq!(s.to_string(), "[1, 1] u [3, 5]");
        // ≠ on an unbounded domain
        let h = Formula::ne(tt(), Term::int(0));
        let s = solve(&h, &t(), None, None).unwrap();
        assert_eq!(s.to_string(), "(-inf, 0) u (0, inf)");
    }
}
