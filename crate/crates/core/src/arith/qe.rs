//! Quantifier elimination and model finding for linear real arithmetic
//! (Fourier-Motzkin over a disjunctive normal form).
//!
//! Real-sorted quantifiers are eliminated; every other atom is carried
//! along as an opaque propositional literal, which may not mention an
//! eliminated variable.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::linear::LinExpr;
use crate::logic::simplify::negate;
use crate::logic::{rat, simplify, CmpOp, Formula, Rat, Sort, Symbol, Term, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QeError {
    #[error("nonlinear arithmetic outside the decidable fragment: {0}")]
    Nonlinear(String),
    #[error("unsupported quantifier over {0}")]
    Unsupported(String),
    #[error("cannot decide: {0}")]
    Undetermined(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
}

/// `expr rel 0`.
#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub expr: LinExpr,
    pub rel: Rel,
}

impl Constraint {
    fn new(expr: LinExpr, rel: Rel) -> Self {
        Constraint { expr, rel }.normalized()
    }

    /// Scales so the first coefficient has magnitude one (and is positive
    /// for `=`/`≠`).
    fn normalized(mut self) -> Self {
        if let Some(c) = self.expr.coeffs.values().next().cloned() {
            let s = match self.rel {
                Rel::Eq | Rel::Ne => Rat::one() / &c,
                _ => Rat::one() / c.abs(),
            };
            self.expr = self.expr.scale(&s);
        }
        self
    }

    fn constant_truth(&self) -> Option<bool> {
        if !self.expr.is_constant() {
            return None;
        }
        let c = &self.expr.constant;
        Some(match self.rel {
            Rel::Lt => c.is_negative(),
            Rel::Le => !c.is_positive(),
            Rel::Eq => c.is_zero(),
            Rel::Ne => !c.is_zero(),
        })
    }

    pub fn holds(&self, env: &dyn Fn(&Term) -> Option<Rat>) -> Option<bool> {
        let v = self.expr.eval(env)?;
        Some(match self.rel {
            Rel::Lt => v.is_negative(),
            Rel::Le => !v.is_positive(),
            Rel::Eq => v.is_zero(),
            Rel::Ne => !v.is_zero(),
        })
    }

    pub fn to_formula(&self) -> Formula {
        let mut lhs = self.expr.clone();
        let rhs = Term::Num(-lhs.constant.clone());
        lhs.constant = Rat::zero();
        let lhs = lhs.to_term();
        match self.rel {
            Rel::Lt => Formula::lt(lhs, rhs),
            Rel::Le => Formula::le(lhs, rhs),
            Rel::Eq => Formula::eq(lhs, rhs),
            Rel::Ne => Formula::ne(lhs, rhs),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum Lit {
    Lin(Constraint),
    /// An opaque atom with its polarity.
    Prop(Formula, bool),
}

impl Lit {
    fn mentions(&self, v: &Var) -> bool {
        match self {
            Lit::Lin(c) => c.expr.mentions(v),
            Lit::Prop(a, _) => a.has_free(v),
        }
    }

    fn to_formula(&self) -> Formula {
        match self {
            Lit::Lin(c) => c.to_formula(),
            Lit::Prop(a, true) => a.clone(),
            Lit::Prop(a, false) => Formula::not(a.clone()),
        }
    }
}

pub type Conj = Vec<Lit>;

/// Linear arithmetic engine. `object_valued` names functions and fluents
/// whose values are objects, so that equalities over them stay opaque.
#[derive(Clone, Default, Debug)]
pub struct Lra {
    pub object_valued: BTreeSet<Symbol>,
}

fn is_object_term(t: &Term, object_valued: &BTreeSet<Symbol>) -> bool {
    match t {
        Term::Obj(_) | Term::Action { .. } | Term::S0 | Term::Do(..) => true,
        Term::Var(v) => v.sort != Sort::Real,
        Term::Fluent(n, ..) | Term::Static(n, _) => object_valued.contains(n),
        _ => false,
    }
}

impl Lra {
    pub fn new(object_valued: BTreeSet<Symbol>) -> Self {
        Lra { object_valued }
    }

    fn atom_lit(&self, a: &Formula, positive: bool) -> Lit {
        let lin = |x: &Term, y: &Term| Some(LinExpr::from_term(x)?.sub(&LinExpr::from_term(y)?));
        match a {
            Formula::Cmp(op, x, y) => match lin(x, y) {
                Some(e) => match (op, positive) {
                    (CmpOp::Lt, true) => Lit::Lin(Constraint::new(e, Rel::Lt)),
                    (CmpOp::Le, true) => Lit::Lin(Constraint::new(e, Rel::Le)),
                    (CmpOp::Lt, false) => Lit::Lin(Constraint::new(e.scale(&rat(-1)), Rel::Le)),
                    (CmpOp::Le, false) => Lit::Lin(Constraint::new(e.scale(&rat(-1)), Rel::Lt)),
                },
                None => Lit::Prop(a.clone(), positive),
            },
            Formula::Eq(x, y)
                if !is_object_term(x, &self.object_valued)
                    && !is_object_term(y, &self.object_valued) =>
            {
                match lin(x, y) {
                    Some(e) => {
                        Lit::Lin(Constraint::new(e, if positive { Rel::Eq } else { Rel::Ne }))
                    }
                    None => Lit::Prop(a.clone(), positive),
                }
            }
            _ => Lit::Prop(a.clone(), positive),
        }
    }

    /// Disjunctive normal form of a quantifier-free formula. Constant
    /// literals are decided; unsatisfiable conjunctions are dropped.
    pub fn dnf(&self, f: &Formula) -> Result<Vec<Conj>, QeError> {
        self.dnf_pol(f, true)
    }

    fn dnf_pol(&self, f: &Formula, pos: bool) -> Result<Vec<Conj>, QeError> {
        Ok(match f {
            Formula::True => {
                if pos {
                    vec![vec![]]
                } else {
                    vec![]
                }
            }
            Formula::False => {
                if pos {
                    vec![]
                } else {
                    vec![vec![]]
                }
            }
            Formula::Not(g) => self.dnf_pol(g, !pos)?,
            Formula::And(fs) | Formula::Or(fs) => {
                let conjunctive = matches!(f, Formula::And(_)) == pos;
                if conjunctive {
                    let mut acc: Vec<Conj> = vec![vec![]];
                    for g in fs {
                        let d = self.dnf_pol(g, pos)?;
                        let mut next = Vec::new();
                        for a in &acc {
                            for b in &d {
                                if let Some(c) = merge(a, b) {
                                    next.push(c);
                                }
                            }
                        }
                        next.sort();
                        next.dedup();
                        acc = next;
                        if acc.is_empty() {
                            break;
                        }
                    }
                    acc
                } else {
                    let mut out = Vec::new();
                    for g in fs {
                        out.extend(self.dnf_pol(g, pos)?);
                    }
                    out.sort();
                    out.dedup();
                    out
                }
            }
            Formula::Implies(a, b) => {
                let g = Formula::or(vec![Formula::not((**a).clone()), (**b).clone()]);
                self.dnf_pol(&g, pos)?
            }
            Formula::Iff(a, b) => {
                let g = Formula::or(vec![
                    Formula::and(vec![(**a).clone(), (**b).clone()]),
                    Formula::and(vec![
                        Formula::not((**a).clone()),
                        Formula::not((**b).clone()),
                    ]),
                ]);
                self.dnf_pol(&g, pos)?
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                return Err(QeError::Unsupported(format!(
                    "{} (nested quantifier in {f})",
                    v.sort
                )))
            }
            atom => match self.atom_lit(atom, pos) {
                Lit::Lin(c) => match c.constant_truth() {
                    Some(true) => vec![vec![]],
                    Some(false) => vec![],
                    None => vec![vec![Lit::Lin(c)]],
                },
                lit => vec![vec![lit]],
            },
        })
    }

    pub fn dnf_to_formula(dnf: &[Conj]) -> Formula {
        Formula::or(
            dnf.iter()
                .map(|c| Formula::and(c.iter().map(Lit::to_formula).collect()))
                .collect(),
        )
    }

    /// Eliminates every real-sorted quantifier. Other quantifiers are an
    /// error.
    pub fn eliminate(&self, f: &Formula) -> Result<Formula, QeError> {
        Ok(match f {
            Formula::Exists(v, body) => {
                let body = self.eliminate(body)?;
                self.exists(v, &body)?
            }
            Formula::Forall(v, body) => {
                let body = self.eliminate(body)?;
                let e = self.exists(v, &negate(&body))?;
                simplify(&negate(&e))
            }
            a if a.is_atom() => a.clone(),
            other => {
                let mut err = None;
                let out = other.map_children(|c| match self.eliminate(c) {
                    Ok(g) => g,
                    Err(e) => {
                        err.get_or_insert(e);
                        Formula::True
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                out
            }
        })
    }

    /// `∃v. body` for quantifier-free `body`.
    pub fn exists(&self, v: &Var, body: &Formula) -> Result<Formula, QeError> {
        if v.sort != Sort::Real {
            return Err(QeError::Unsupported(format!("{} {}", v.sort, v.name)));
        }
        let mut out = Vec::new();
        for conj in self.dnf(body)? {
            out.extend(eliminate_var(conj, v)?);
        }
        out.sort();
        out.dedup();
        Ok(Lra::dnf_to_formula(&out))
    }

    /// Truth value of a sentence whose only non-constant atoms are real
    /// quantified variables.
    pub fn decide(&self, f: &Formula) -> Result<bool, QeError> {
        let qf = self.eliminate(f)?;
        let dnf = self.dnf(&qf)?;
        if dnf.iter().any(|c| c.is_empty()) {
            return Ok(true);
        }
        if dnf.is_empty() {
            return Ok(false);
        }
        Err(QeError::Undetermined(Lra::dnf_to_formula(&dnf).to_string()))
    }

    /// A rational assignment to the unknowns (the atoms) of a
    /// quantifier-free formula making it true, or `None` if unsatisfiable.
    /// Opaque literals must already be resolved.
    pub fn find_model(&self, f: &Formula) -> Result<Option<BTreeMap<Term, Rat>>, QeError> {
        for conj in self.dnf(f)? {
            let mut lins = Vec::new();
            for l in conj {
                match l {
                    Lit::Lin(c) => lins.push(c),
                    Lit::Prop(a, _) => {
                        return Err(QeError::Undetermined(format!("opaque atom {a}")))
                    }
                }
            }
            let mut keys: BTreeSet<Term> = BTreeSet::new();
            for c in &lins {
                keys.extend(c.expr.coeffs.keys().cloned());
            }
            let keys: Vec<Term> = keys.into_iter().collect();
            if let Some(m) = solve_conj(lins, &keys) {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    pub fn satisfiable(&self, f: &Formula) -> Result<bool, QeError> {
        Ok(self.find_model(f)?.is_some())
    }

    /// Satisfiability of a formula with real quantifiers, reading every
    /// opaque atom as an unconstrained proposition.
    pub fn sat(&self, f: &Formula) -> Result<bool, QeError> {
        let qf = self.eliminate(f)?;
        for conj in self.dnf(&qf)? {
            let lins: Vec<Constraint> = conj
                .into_iter()
                .filter_map(|l| match l {
                    Lit::Lin(c) => Some(c),
                    Lit::Prop(..) => None,
                })
                .collect();
            let keys: Vec<Term> = lins
                .iter()
                .flat_map(|c| c.expr.coeffs.keys().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if solve_conj(lins, &keys).is_some() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Whether an atom is read as a linear constraint rather than an
    /// opaque proposition.
    pub fn is_arith_atom(&self, a: &Formula) -> bool {
        a.is_atom() && matches!(self.atom_lit(a, true), Lit::Lin(_))
    }

    /// A satisfying assignment for a formula whose atoms are all linear;
    /// real quantifiers are eliminated first.
    pub fn model_of(&self, f: &Formula) -> Result<Option<BTreeMap<Term, Rat>>, QeError> {
        let qf = self.eliminate(f)?;
        self.find_model(&qf)
    }

    /// Validity, dual to [`Lra::sat`].
    pub fn valid(&self, f: &Formula) -> Result<bool, QeError> {
        Ok(!self.sat(&negate(f))?)
    }
}

fn merge(a: &Conj, b: &Conj) -> Option<Conj> {
    let mut out = a.clone();
    for l in b {
        if let Lit::Prop(atom, p) = l {
            if out.contains(&Lit::Prop(atom.clone(), !p)) {
                return None;
            }
        }
        if !out.contains(l) {
            out.push(l.clone());
        }
    }
    out.sort();
    Some(out)
}

fn push_checked(out: &mut Vec<Lit>, c: Constraint) -> bool {
    match c.constant_truth() {
        Some(true) => true,
        Some(false) => false,
        None => {
            let l = Lit::Lin(c);
            if !out.contains(&l) {
                out.push(l);
            }
            true
        }
    }
}

/// `(bound, strict)` pairs from constraints `a·x + r rel 0`.
type Bound = (LinExpr, bool);

fn eliminate_var(conj: Conj, v: &Var) -> Result<Vec<Conj>, QeError> {
    let key = Term::Var(v.clone());
    if let Some(Lit::Prop(a, _)) = conj
        .iter()
        .find(|l| matches!(l, Lit::Prop(..)) && l.mentions(v))
    {
        return Err(QeError::Nonlinear(format!(
            "{a} (while eliminating {})",
            v.name
        )));
    }
    if !conj.iter().any(|l| l.mentions(v)) {
        return Ok(vec![conj]);
    }
    // Equality: solve and substitute.
    if let Some(pos) = conj
        .iter()
        .position(|l| matches!(l, Lit::Lin(c) if c.rel == Rel::Eq && !c.expr.coeff(&key).is_zero()))
    {
        let Lit::Lin(eq) = &conj[pos] else {
            unreachable!()
        };
        let a = eq.expr.coeff(&key);
        let mut rest = eq.expr.clone();
        rest.coeffs.remove(&key);
        let solution = rest.scale(&(-Rat::one() / a));
        let mut out = Vec::new();
        for (i, l) in conj.iter().enumerate() {
            if i == pos {
                continue;
            }
            match l {
                Lit::Lin(c) => {
                    let c2 = Constraint::new(c.expr.substitute(&key, &solution), c.rel);
                    if !push_checked(&mut out, c2) {
                        return Ok(vec![]);
                    }
                }
                other => out.push(other.clone()),
            }
        }
        out.sort();
        return Ok(vec![out]);
    }
    // Split disequalities on v into strict inequalities.
    let mut branches: Vec<Conj> = vec![vec![]];
    for l in conj {
        match l {
            Lit::Lin(c) if c.rel == Rel::Ne && !c.expr.coeff(&key).is_zero() => {
                let lt = Lit::Lin(Constraint::new(c.expr.clone(), Rel::Lt));
                let gt = Lit::Lin(Constraint::new(c.expr.scale(&rat(-1)), Rel::Lt));
                branches = branches
                    .into_iter()
                    .flat_map(|b| {
                        let mut b1 = b.clone();
                        b1.push(lt.clone());
                        let mut b2 = b;
                        b2.push(gt.clone());
                        [b1, b2]
                    })
                    .collect();
            }
            other => branches.iter_mut().for_each(|b| b.push(other.clone())),
        }
    }
    let mut out = Vec::new();
    for b in branches {
        if let Some(c) = fourier_motzkin(b, &key) {
            out.push(c);
        }
    }
    Ok(out)
}

fn split_bounds(conj: Conj, key: &Term) -> (Vec<Bound>, Vec<Bound>, Vec<Lit>) {
    let (mut lower, mut upper, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for l in conj {
        match &l {
            Lit::Lin(c) if !c.expr.coeff(key).is_zero() => {
                let a = c.expr.coeff(key);
                let mut r = c.expr.clone();
                r.coeffs.remove(key);
                // a·x + r rel 0  ⇒  x rel' −r/a
                let b = r.scale(&(-Rat::one() / &a));
                let strict = c.rel == Rel::Lt;
                if a.is_positive() {
                    upper.push((b, strict));
                } else {
                    lower.push((b, strict));
                }
            }
            _ => rest.push(l),
        }
    }
    (lower, upper, rest)
}

fn fourier_motzkin(conj: Conj, key: &Term) -> Option<Conj> {
    let (lower, upper, mut out) = split_bounds(conj, key);
    for (l, ls) in &lower {
        for (u, us) in &upper {
            let rel = if *ls || *us { Rel::Lt } else { Rel::Le };
            if !push_checked(&mut out, Constraint::new(l.sub(u), rel)) {
                return None;
            }
        }
    }
    out.sort();
    Some(out)
}

/// Finds values for `keys` satisfying every constraint.
fn solve_conj(conj: Vec<Constraint>, keys: &[Term]) -> Option<BTreeMap<Term, Rat>> {
    let Some((key, rest_keys)) = keys.split_first() else {
        return conj
            .iter()
            .all(|c| c.constant_truth() == Some(true))
            .then(BTreeMap::new);
    };
    let lits: Conj = conj.into_iter().map(Lit::Lin).collect();
    let as_cons = |c: Conj| -> Vec<Constraint> {
        c.into_iter()
            .filter_map(|l| match l {
                Lit::Lin(c) => Some(c),
                Lit::Prop(..) => None,
            })
            .collect()
    };

    if let Some(pos) = lits
        .iter()
        .position(|l| matches!(l, Lit::Lin(c) if c.rel == Rel::Eq && !c.expr.coeff(key).is_zero()))
    {
        let Lit::Lin(eq) = &lits[pos] else {
            unreachable!()
        };
        let a = eq.expr.coeff(key);
        let mut r = eq.expr.clone();
        r.coeffs.remove(key);
        let solution = r.scale(&(-Rat::one() / a));
        let mut out = Vec::new();
        for (i, l) in lits.iter().enumerate() {
            if i == pos {
                continue;
            }
            let Lit::Lin(c) = l else { continue };
            if !push_checked(
                &mut out,
                Constraint::new(c.expr.substitute(key, &solution), c.rel),
            ) {
                return None;
            }
        }
        let mut model = solve_conj(as_cons(out), rest_keys)?;
        let val = solution.eval(&|k| model.get(k).cloned().or(Some(Rat::zero())))?;
        model.insert(key.clone(), val);
        return Some(model);
    }

    // Branch on disequalities mentioning the key.
    if let Some(pos) = lits
        .iter()
        .position(|l| matches!(l, Lit::Lin(c) if c.rel == Rel::Ne && !c.expr.coeff(key).is_zero()))
    {
        let Lit::Lin(ne) = lits[pos].clone() else {
            unreachable!()
        };
        for e in [ne.expr.clone(), ne.expr.scale(&rat(-1))] {
            let mut b: Vec<Constraint> = as_cons(lits.clone());
            b.remove(pos);
            b.push(Constraint::new(e, Rel::Lt));
            if let Some(m) = solve_conj(b, keys) {
                return Some(m);
            }
        }
        return None;
    }

    let (lower, upper, _) = split_bounds(lits.clone(), key);
    let projected = fourier_motzkin(lits, key)?;
    let mut model = solve_conj(as_cons(projected), rest_keys)?;
    let env = |k: &Term| model.get(k).cloned().or(Some(Rat::zero()));
    let lo = lower
        .iter()
        .map(|(e, s)| (e.eval(&env).unwrap_or_default(), *s))
        .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let hi = upper
        .iter()
        .map(|(e, s)| (e.eval(&env).unwrap_or_default(), *s))
        .min_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    let val = match (lo, hi) {
        (Some((l, ls)), Some((h, hs))) => {
            if l == h && !ls && !hs {
                l
            } else {
                (l + h) / rat(2)
            }
        }
        (Some((l, s)), None) => {
            if s {
                l + rat(1)
            } else {
                l
            }
        }
        (None, Some((h, s))) => {
            if s {
                h - rat(1)
            } else {
                h
            }
        }
        (None, None) => Rat::zero(),
    };
    model.insert(key.clone(), val);
    Some(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ratio;

    fn x() -> Var {
        Var::real("x")
    }
    fn y() -> Var {
        Var::real("y")
    }
    fn tx() -> Term {
        Term::var(&x())
    }
    fn ty() -> Term {
        Term::var(&y())
    }

    #[test]
    fn decides_simple_sentences() {
        let lra = Lra::default();
        // ∃x. 1 < x ∧ x < 2
        let f = Formula::exists(
            x(),
            Formula::and(vec![
                Formula::lt(Term::int(1), tx()),
                Formula::lt(tx(), Term::int(2)),
            ]),
        );
        assert!(lra.decide(&f).unwrap());
        // ∃x. 2 < x ∧ x < 2
        let g = Formula::exists(
            x(),
            Formula::and(vec![
                Formula::lt(Term::int(2), tx()),
                Formula::lt(tx(), Term::int(2)),
            ]),
        );
        assert!(!lra.decide(&g).unwrap());
        // ∀x ∃y. y = x + 1
        let h = Formula::forall(
            x(),
            Formula::exists(y(), Formula::eq(ty(), Term::add(tx(), Term::int(1)))),
        );
        assert!(lra.decide(&h).unwrap());
        // ∀x. x ≠ 0
        let k = Formula::forall(x(), Formula::ne(tx(), Term::int(0)));
        assert!(!lra.decide(&k).unwrap());
    }

    #[test]
    fn disequality_split() {
        let lra = Lra::default();
        // ∃x. 0 <= x <= 0 ∧ x ≠ 0  is false
        let f = Formula::exists(
            x(),
            Formula::and(vec![
                Formula::le(Term::int(0), tx()),
                Formula::le(tx(), Term::int(0)),
                Formula::ne(tx(), Term::int(0)),
            ]),
        );
        assert!(!lra.decide(&f).unwrap());
    }

    #[test]
    fn model_witness() {
        let lra = Lra::default();
        let f = Formula::and(vec![
            Formula::lt(tx(), ty()),
            Formula::eq(ty(), Term::add(tx(), Term::num(ratio(1, 2)))),
            Formula::le(Term::int(3), tx()),
        ]);
        let m = lra.find_model(&f).unwrap().unwrap();
        let env = |k: &Term| m.get(k).cloned();
        for c in lra.dnf(&f).unwrap()[0].iter() {
            if let Lit::Lin(c) = c {
                assert_eq!(c.holds(&env), Some(true));
            }
        }
    }

    #[test]
    fn nonlinear_elimination_is_reported() {
        let lra = Lra::default();
        let f = Formula::exists(x(), Formula::eq(Term::mul(tx(), tx()), Term::int(2)));
        assert!(matches!(lra.decide(&f), Err(QeError::Nonlinear(_))));
    }
}
