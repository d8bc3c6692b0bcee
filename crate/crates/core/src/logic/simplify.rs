//! Truth-preserving simplification.
//!
//! Rules, applied bottom-up to a fixpoint: `start(do(a, s))` becomes
//! `time(a)`, `time` of an action term becomes its temporal argument, ground
//! arithmetic is folded, equalities between actions and between object
//! constants are resolved by unique names, boolean constants propagate, and
//! existentials with a defining equation are eliminated by substitution.
//!
//! A [`SimplifyContext`] may additionally supply ground facts about the
//! initial situation; then statics, relational fluents at `S0`, `start(S0)`
//! and (optionally) functional fluents at `S0` are replaced by their values,
//! and object quantifiers are expanded over their finite domains.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::formula::{CmpOp, Formula};
use super::rational::Rat;
use super::subst::{fresh_var, subst_formula, Subst};
use super::symbol::Symbol;
use super::term::{ArithOp, Sort, Term, Var};

/// Ground information about the initial situation.
pub trait GroundFacts: Sync {
    fn start_s0(&self) -> Option<Rat>;
    fn static_value(&self, name: &Symbol, args: &[Term]) -> Option<Term>;
    fn static_holds(&self, name: &Symbol, args: &[Term]) -> Option<bool>;
    fn rel_at_s0(&self, name: &Symbol, args: &[Term]) -> Option<bool>;
    fn fluent_at_s0(&self, name: &Symbol, args: &[Term]) -> Option<Term>;
    fn domain(&self, sort: &Sort) -> Option<Vec<Term>>;
}

#[derive(Clone, Copy, Default)]
pub struct SimplifyContext<'a> {
    pub facts: Option<&'a dyn GroundFacts>,
    /// Also replace functional fluents at `S0` by their values.
    pub resolve_functional: bool,
}

impl<'a> SimplifyContext<'a> {
    pub fn pure() -> Self {
        SimplifyContext {
            facts: None,
            resolve_functional: false,
        }
    }

    /// Statics, relational fluents and `start(S0)` resolved; functional
    /// fluents kept symbolic.
    pub fn with_facts(facts: &'a dyn GroundFacts) -> Self {
        SimplifyContext {
            facts: Some(facts),
            resolve_functional: false,
        }
    }

    /// Everything known about `S0` resolved.
    pub fn full(facts: &'a dyn GroundFacts) -> Self {
        SimplifyContext {
            facts: Some(facts),
            resolve_functional: true,
        }
    }
}

const MAX_PASSES: usize = 64;

pub fn simplify(phi: &Formula) -> Formula {
    simplify_with(phi, &SimplifyContext::pure())
}

pub fn simplify_with(phi: &Formula, ctx: &SimplifyContext<'_>) -> Formula {
    let mut cur = phi.clone();
    for _ in 0..MAX_PASSES {
        let next = ctx.formula(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

pub fn simplify_term(t: &Term) -> Term {
    simplify_term_with(t, &SimplifyContext::pure())
}

pub fn simplify_term_with(t: &Term, ctx: &SimplifyContext<'_>) -> Term {
    let mut cur = t.clone();
    for _ in 0..MAX_PASSES {
        let next = ctx.term(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

fn is_ground_value(t: &Term) -> bool {
    matches!(t, Term::Obj(_) | Term::Num(_))
}

/// One-level negation pushed through connectives, without recursing into
/// atoms.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => (**g).clone(),
        Formula::And(fs) => Formula::or(fs.iter().map(negate).collect()),
        Formula::Or(fs) => Formula::and(fs.iter().map(negate).collect()),
        Formula::Implies(a, b) => Formula::and(vec![(**a).clone(), negate(b)]),
        Formula::Exists(v, b) => Formula::forall(v.clone(), negate(b)),
        Formula::Forall(v, b) => Formula::exists(v.clone(), negate(b)),
        other => Formula::not(other.clone()),
    }
}

/// If `f` is `v = t` or `t = v` with `t` free of `v`, returns `t`.
fn defining_term<'f>(f: &'f Formula, v: &Var) -> Option<&'f Term> {
    match f {
        Formula::Eq(Term::Var(w), t) if w == v && !t.mentions_var(v) => Some(t),
        Formula::Eq(t, Term::Var(w)) if w == v && !t.mentions_var(v) => Some(t),
        _ => None,
    }
}

/// True when some conjunct of `f` (looking through nested existentials)
/// defines `v`.
fn defines(f: &Formula, v: &Var) -> bool {
    f.conjuncts().into_iter().any(|c| match c {
        Formula::Exists(w, body) if w != v => defines(body, v),
        _ => defining_term(c, v).is_some(),
    })
}

impl SimplifyContext<'_> {
    fn term(&self, t: &Term) -> Term {
        let t = t.map_children(|c| self.term(c));
        match t {
            Term::Start(s) => match *s {
                Term::Do(a, _) => Term::Time(a),
                Term::S0 => match self.facts.and_then(|f| f.start_s0()) {
                    Some(r) => Term::Num(r),
                    None => Term::Start(Box::new(Term::S0)),
                },
                other => Term::Start(Box::new(other)),
            },
            Term::Time(a) => match *a {
                Term::Action { time, .. } => *time,
                other => Term::Time(Box::new(other)),
            },
            Term::Arith(op, a, b) => fold_arith(op, *a, *b),
            Term::Static(ref name, ref args) if args.iter().all(is_ground_value) => {
                match self.facts.and_then(|f| f.static_value(name, args)) {
                    Some(v) => v,
                    None => t,
                }
            }
            Term::Fluent(ref name, ref args, ref s)
                if self.resolve_functional
                    && **s == Term::S0
                    && args.iter().all(is_ground_value) =>
            {
                match self.facts.and_then(|f| f.fluent_at_s0(name, args)) {
                    Some(v) => v,
                    None => t,
                }
            }
            other => other,
        }
    }

    fn atom(&self, f: &Formula) -> Formula {
        let f = f.map_atom_terms(|t| self.term(t));
        match f {
            Formula::Eq(a, b) => self.equality(a, b),
            Formula::Cmp(op, a, b) => match (a.as_num(), b.as_num()) {
                (Some(x), Some(y)) => bool_formula(match op {
                    CmpOp::Lt => x < y,
                    CmpOp::Le => x <= y,
                }),
                _ => Formula::Cmp(op, a, b),
            },
            Formula::Rel(ref name, ref args, ref s)
                if *s == Term::S0 && args.iter().all(is_ground_value) =>
            {
                match self.facts.and_then(|fs| fs.rel_at_s0(name, args)) {
                    Some(v) => bool_formula(v),
                    None => f,
                }
            }
            Formula::Pred(ref name, ref args) if args.iter().all(is_ground_value) => {
                match self.facts.and_then(|fs| fs.static_holds(name, args)) {
                    Some(v) => bool_formula(v),
                    None => f,
                }
            }
            other => other,
        }
    }

    fn equality(&self, a: Term, b: Term) -> Formula {
        if a == b {
            return Formula::True;
        }
        match (&a, &b) {
            (Term::Num(x), Term::Num(y)) => bool_formula(x == y),
            (Term::Obj(x), Term::Obj(y)) => bool_formula(x == y),
            (Term::Obj(_), Term::Num(_)) | (Term::Num(_), Term::Obj(_)) => Formula::False,
            (
                Term::Action {
                    functor: f1,
                    args: a1,
                    time: t1,
                },
                Term::Action {
                    functor: f2,
                    args: a2,
                    time: t2,
                },
            ) => {
                if f1 != f2 || a1.len() != a2.len() {
                    return Formula::False;
                }
                let mut parts: Vec<Formula> = a1
                    .iter()
                    .zip(a2)
                    .map(|(x, y)| self.equality(x.clone(), y.clone()))
                    .collect();
                parts.push(self.equality((**t1).clone(), (**t2).clone()));
                self.and(parts)
            }
            (Term::S0, Term::Do(..)) | (Term::Do(..), Term::S0) => Formula::False,
            (Term::Do(x1, s1), Term::Do(x2, s2)) => self.and(vec![
                self.equality((**x1).clone(), (**x2).clone()),
                self.equality((**s1).clone(), (**s2).clone()),
            ]),
            _ => Formula::Eq(a, b),
        }
    }

    fn and(&self, fs: Vec<Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        let mut stack: Vec<Formula> = fs.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => stack.extend(inner.into_iter().rev()),
                g => {
                    if !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        }
        for g in &out {
            if let Formula::Not(inner) = g {
                if out.contains(inner) {
                    return Formula::False;
                }
            }
        }
        Formula::and(out)
    }

    fn or(&self, fs: Vec<Formula>) -> Formula {
        let mut out: Vec<Formula> = Vec::new();
        let mut stack: Vec<Formula> = fs.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => stack.extend(inner.into_iter().rev()),
                g => {
                    if !out.contains(&g) {
                        out.push(g);
                    }
                }
            }
        }
        for g in &out {
            if let Formula::Not(inner) = g {
                if out.contains(inner) {
                    return Formula::True;
                }
            }
        }
        Formula::or(out)
    }

    fn formula(&self, f: &Formula) -> Formula {
        match f {
            a if a.is_atom() => self.atom(a),
            Formula::Not(g) => match self.formula(g) {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(h) => *h,
                Formula::Cmp(CmpOp::Lt, a, b) => Formula::Cmp(CmpOp::Le, b, a),
                Formula::Cmp(CmpOp::Le, a, b) => Formula::Cmp(CmpOp::Lt, b, a),
                h => Formula::not(h),
            },
            Formula::And(fs) => self.and(fs.iter().map(|g| self.formula(g)).collect()),
            Formula::Or(fs) => self.or(fs.iter().map(|g| self.formula(g)).collect()),
            Formula::Implies(a, b) => {
                let (a, b) = (self.formula(a), self.formula(b));
                match (&a, &b) {
                    (Formula::True, _) => b,
                    (Formula::False, _) | (_, Formula::True) => Formula::True,
                    (_, Formula::False) => self.formula(&negate(&a)),
                    _ if a == b => Formula::True,
                    _ => Formula::implies(a, b),
                }
            }
            Formula::Iff(a, b) => {
                let (a, b) = (self.formula(a), self.formula(b));
                match (&a, &b) {
                    (Formula::True, _) => b,
                    (_, Formula::True) => a,
                    (Formula::False, _) => self.formula(&negate(&b)),
                    (_, Formula::False) => self.formula(&negate(&a)),
                    _ if a == b => Formula::True,
                    _ => Formula::iff(a, b),
                }
            }
            Formula::Exists(..) => {
                let mut binders = Vec::new();
                let mut cur = f;
                while let Formula::Exists(v, body) = cur {
                    binders.push(v.clone());
                    cur = body;
                }
                let body = self.formula(cur);
                self.exists_block(binders, body)
            }
            Formula::Forall(v, body) => {
                let body = self.formula(body);
                if !body.has_free(v) {
                    return body;
                }
                if let Some(dom) = self.object_domain(v) {
                    let parts = dom
                        .iter()
                        .map(|c| self.formula(&subst_one(&body, v, c)))
                        .collect();
                    return self.and(parts);
                }
                // Use the existential rules on the negation when they eliminate
                // the binder; otherwise keep the universal as is.
                let neg = self.formula(&negate(&body));
                let e = self.exists_block(vec![v.clone()], neg);
                if contains_binder(&e, v) {
                    Formula::forall(v.clone(), body)
                } else {
                    self.formula(&negate(&e))
                }
            }
            _ => unreachable!("atoms handled above"),
        }
    }

    fn object_domain(&self, v: &Var) -> Option<Vec<Term>> {
        if !v.sort.is_object() {
            return None;
        }
        self.facts.and_then(|f| f.domain(&v.sort))
    }

    /// Simplifies `∃binders. body` where `body` is already simplified.
    fn exists_block(&self, mut binders: Vec<Var>, body: Formula) -> Formula {
        if body.is_false() {
            return Formula::False;
        }
        // ∃ distributes over ∨ without duplication.
        if let Formula::Or(ds) = &body {
            let parts = ds
                .iter()
                .map(|d| self.exists_block(binders.clone(), d.clone()))
                .collect();
            return self.or(parts);
        }
        let mut conj: Vec<Formula> = body.conjuncts().into_iter().cloned().collect();

        // Lift existentials out of conjuncts, renaming apart.
        let mut avoid: BTreeSet<Symbol> = body.all_names();
        avoid.extend(binders.iter().map(|v| v.name.clone()));
        let mut i = 0;
        while i < conj.len() {
            if let Formula::Exists(..) = &conj[i] {
                let mut cur = conj.remove(i);
                let mut renaming = Subst::new();
                while let Formula::Exists(w, inner) = cur {
                    let nw =
                        if binders.iter().any(|b| b.name == w.name) || others_mention(&conj, &w) {
                            let nw = fresh_var(&w, &avoid);
                            renaming.insert(w.clone(), Term::Var(nw.clone()));
                            nw
                        } else {
                            w.clone()
                        };
                    avoid.insert(nw.name.clone());
                    binders.push(nw);
                    cur = *inner;
                }
                let cur = subst_formula(&cur, &renaming);
                let lifted: Vec<Formula> = cur.conjuncts().into_iter().cloned().collect();
                for (k, c) in lifted.into_iter().enumerate() {
                    conj.insert(i + k, c);
                }
            } else {
                i += 1;
            }
        }

        // One-point rule.
        'outer: loop {
            for bi in 0..binders.len() {
                let v = binders[bi].clone();
                for k in 0..conj.len() {
                    if let Some(t) = defining_term(&conj[k], &v) {
                        let t = t.clone();
                        binders.remove(bi);
                        conj.remove(k);
                        let mut s = Subst::new();
                        s.insert(v, t);
                        let substituted: Vec<Formula> = conj
                            .iter()
                            .map(|c| self.formula(&subst_formula(c, &s)))
                            .collect();
                        match self.and(substituted) {
                            Formula::False => return Formula::False,
                            f => conj = f.conjuncts().into_iter().cloned().collect(),
                        }
                        continue 'outer;
                    }
                }
            }
            break;
        }

        binders.retain(|v| conj.iter().any(|c| c.has_free(v)));
        if binders.is_empty() {
            return self.and(conj);
        }

        // Finite object domains.
        if let Some(pos) = binders.iter().position(|v| self.object_domain(v).is_some()) {
            let v = binders.remove(pos);
            let dom = self.object_domain(&v).unwrap_or_default();
            let body = Formula::and(conj);
            let parts = dom
                .iter()
                .map(|c| {
                    let inst = self.formula(&subst_one(&body, &v, c));
                    self.exists_block(binders.clone(), inst)
                })
                .collect();
            return self.or(parts);
        }

        // Distribute over a disjunctive conjunct when every disjunct then
        // admits the one-point rule.
        for k in 0..conj.len() {
            if let Formula::Or(ds) = &conj[k] {
                let target = binders.iter().find(|v| ds.iter().all(|d| defines(d, v)));
                if target.is_some() {
                    let ds = ds.clone();
                    let parts = ds
                        .into_iter()
                        .map(|d| {
                            let mut c = conj.clone();
                            c[k] = d;
                            let b = self.and(c);
                            self.exists_block(binders.clone(), b)
                        })
                        .collect();
                    return self.or(parts);
                }
            }
        }

        // Miniscoping: conjuncts free of every binder move outside.
        let (inside, outside): (Vec<Formula>, Vec<Formula>) = conj
            .into_iter()
            .partition(|c| binders.iter().any(|v| c.has_free(v)));
        let mut parts = outside;
        parts.push(Formula::exists_many(binders, Formula::and(inside)));
        self.and(parts)
    }
}

fn others_mention(conj: &[Formula], w: &Var) -> bool {
    conj.iter().any(|c| c.all_names().contains(&w.name))
}

fn contains_binder(f: &Formula, v: &Var) -> bool {
    let mut found = false;
    f.visit_binders(&mut |w| found |= w == v);
    found
}

fn subst_one(f: &Formula, v: &Var, t: &Term) -> Formula {
    let mut s = Subst::new();
    s.insert(v.clone(), t.clone());
    subst_formula(f, &s)
}

fn bool_formula(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

fn fold_arith(op: ArithOp, a: Term, b: Term) -> Term {
    match (op, a.as_num(), b.as_num()) {
        (ArithOp::Add, Some(x), Some(y)) => Term::Num(x + y),
        (ArithOp::Sub, Some(x), Some(y)) => Term::Num(x - y),
        (ArithOp::Mul, Some(x), Some(y)) => Term::Num(x * y),
        (ArithOp::Add, Some(x), _) if x.is_zero() => b,
        (ArithOp::Add | ArithOp::Sub, _, Some(y)) if y.is_zero() => a,
        (ArithOp::Mul, Some(x), _) if x.is_one() => b,
        (ArithOp::Mul, _, Some(y)) if y.is_one() => a,
        (ArithOp::Mul, Some(x), _) | (ArithOp::Mul, _, Some(x)) if x.is_zero() => Term::int(0),
        _ => Term::Arith(op, Box::new(a), Box::new(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sw(t: i64) -> Term {
        Term::action("switch", vec![Term::obj("I")], Term::int(t))
    }

    #[test]
    fn start_of_do_becomes_action_time() {
        let f = Formula::eq(Term::start(Term::do_(sw(1), Term::S0)), Term::int(1));
        assert_eq!(simplify(&f), Formula::True);
        let t = simplify_term(&Term::start(Term::do_(sw(1), Term::S0)));
        assert_eq!(t, Term::int(1));
    }

    #[test]
    fn una_on_actions() {
        assert_eq!(simplify(&Formula::eq(sw(1), sw(2))), Formula::False);
        let other = Term::action(
            "empty",
            vec![Term::obj("I"), Term::obj("in1")],
            Term::int(1),
        );
        assert_eq!(simplify(&Formula::eq(sw(1), other)), Formula::False);
        let t = Var::real("t");
        let pat = Term::action("switch", vec![Term::obj("I")], Term::var(&t));
        let f = Formula::exists(t.clone(), Formula::eq(sw(3), pat));
        assert_eq!(simplify(&f), Formula::True);
    }

    #[test]
    fn ground_arithmetic() {
        let lhs = Term::sub(Term::sub(Term::int(100), Term::int(10)), Term::int(20));
        assert_eq!(simplify(&Formula::lt(lhs, Term::int(95))), Formula::True);
    }

    #[test]
    fn one_point_through_nested_existentials() {
        let y = Var::real("y");
        let q = Var::real("q0");
        let q0 = Term::fluent("que_init", vec![Term::obj("I"), Term::obj("in1")], Term::S0);
        let f = Formula::exists(
            y.clone(),
            Formula::and(vec![
                Formula::lt(Term::var(&y), Term::int(95)),
                Formula::exists(
                    q.clone(),
                    Formula::and(vec![
                        Formula::eq(Term::var(&q), q0.clone()),
                        Formula::eq(Term::var(&y), Term::sub(Term::var(&q), Term::int(20))),
                    ]),
                ),
            ]),
        );
        let out = simplify(&f);
        assert_eq!(
            out,
            Formula::lt(Term::sub(q0, Term::int(20)), Term::int(95))
        );
    }

    #[test]
    fn forall_one_point() {
        let a = Var::action("a");
        let f = Formula::forall(
            a.clone(),
            Formula::implies(
                Formula::eq(Term::var(&a), sw(1)),
                Formula::eq(Term::var(&a), sw(1)),
            ),
        );
        assert_eq!(simplify(&f), Formula::True);
    }

    #[test]
    fn idempotent_on_mixed_input() {
        let y = Var::real("y");
        let x = Var::real("x");
        let f = Formula::exists(
            y.clone(),
            Formula::or(vec![
                Formula::and(vec![
                    Formula::eq(Term::var(&y), Term::var(&x)),
                    Formula::lt(Term::var(&y), Term::int(3)),
                ]),
                Formula::and(vec![
                    Formula::lt(Term::var(&x), Term::var(&y)),
                    Formula::lt(Term::var(&y), Term::int(1)),
                ]),
            ]),
        );
        let once = simplify(&f);
        assert_eq!(simplify(&once), once);
    }
}
