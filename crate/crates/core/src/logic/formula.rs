use std::collections::BTreeSet;

use super::symbol::Symbol;
use super::term::{Term, Var};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CmpOp {
    Lt,
    Le,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    /// Real comparison; `>`/`>=` are represented by swapping operands.
    Cmp(CmpOp, Term, Term),
    /// Relational fluent atom `F(args, situation)`.
    Rel(Symbol, Vec<Term>, Term),
    /// Static predicate atom.
    Pred(Symbol, Vec<Term>),
    Poss(Term, Term),
    /// Situation ordering `s1 ⊑ s2`. Never regressable.
    Precedes(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn ne(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Lt, a, b)
    }

    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Le, a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>, sit: Term) -> Formula {
        Formula::Rel(Symbol::new(name), args, sit)
    }

    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Pred(Symbol::new(name), args)
    }

    pub fn poss(a: Term, s: Term) -> Formula {
        Formula::Poss(a, s)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists_many(vs: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vs: Vec<Var> = vs.into_iter().collect();
        vs.into_iter()
            .rev()
            .fold(body, |b, v| Formula::exists(v, b))
    }

    pub fn forall_many(vs: impl IntoIterator<Item = Var>, body: Formula) -> Formula {
        let vs: Vec<Var> = vs.into_iter().collect();
        vs.into_iter()
            .rev()
            .fold(body, |b, v| Formula::forall(v, b))
    }

    pub fn is_atom(&self) -> bool {
        matches!(
            self,
            Formula::True
                | Formula::False
                | Formula::Eq(..)
                | Formula::Cmp(..)
                | Formula::Rel(..)
                | Formula::Pred(..)
                | Formula::Poss(..)
                | Formula::Precedes(..)
        )
    }

    /// Terms directly under an atom, in order.
    pub fn atom_terms(&self) -> Vec<&Term> {
        match self {
            Formula::Eq(a, b)
            | Formula::Cmp(_, a, b)
            | Formula::Poss(a, b)
            | Formula::Precedes(a, b) => {
                vec![a, b]
            }
            Formula::Rel(_, args, s) => args.iter().chain(std::iter::once(s)).collect(),
            Formula::Pred(_, args) => args.iter().collect(),
            _ => vec![],
        }
    }

    /// Rebuilds an atom with `f` applied to each of its terms. Non-atoms are
    /// returned unchanged.
    pub fn map_atom_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(f(a), f(b)),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, f(a), f(b)),
            Formula::Poss(a, b) => Formula::Poss(f(a), f(b)),
            Formula::Precedes(a, b) => Formula::Precedes(f(a), f(b)),
            Formula::Rel(n, args, s) => {
                Formula::Rel(n.clone(), args.iter().map(&mut f).collect(), f(s))
            }
            Formula::Pred(n, args) => Formula::Pred(n.clone(), args.iter().map(&mut f).collect()),
            other => other.clone(),
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => vec![a],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Implies(a, b) | Formula::Iff(a, b) => vec![a, b],
            _ => vec![],
        }
    }

    /// Rebuilds with `f` applied to immediate subformulas (binders kept).
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::Not(a) => Formula::Not(Box::new(f(a))),
            Formula::And(fs) => Formula::And(fs.iter().map(&mut f).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(&mut f).collect()),
            Formula::Implies(a, b) => Formula::Implies(Box::new(f(a)), Box::new(f(b))),
            Formula::Iff(a, b) => Formula::Iff(Box::new(f(a)), Box::new(f(b))),
            Formula::Exists(v, a) => Formula::Exists(v.clone(), Box::new(f(a))),
            Formula::Forall(v, a) => Formula::Forall(v.clone(), Box::new(f(a))),
            atom => atom.clone(),
        }
    }

    /// Visits every atom (pre-order, left to right).
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        if self.is_atom() {
            f(self);
        } else {
            for c in self.children() {
                c.visit_atoms(f);
            }
        }
    }

    /// Visits every term occurring in an atom, including nested subterms.
    pub fn visit_terms<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        self.visit_atoms(&mut |a| {
            for t in a.atom_terms() {
                t.visit(f);
            }
        });
    }

    pub fn any_term(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        let mut found = false;
        self.visit_terms(&mut |t| {
            if !found && pred(t) {
                found = true;
            }
        });
        found
    }

    pub fn any_atom(&self, pred: &mut impl FnMut(&Formula) -> bool) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| {
            if !found && pred(a) {
                found = true;
            }
        });
        found
    }

    /// Visits every quantifier-bound variable.
    pub fn visit_binders<'a>(&'a self, f: &mut impl FnMut(&'a Var)) {
        if let Formula::Exists(v, _) | Formula::Forall(v, _) = self {
            f(v);
        }
        for c in self.children() {
            c.visit_binders(f);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out, &mut Vec::new());
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<Var>, bound: &mut Vec<Var>) {
        match self {
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.free_vars_into(out, bound);
                bound.pop();
            }
            f if f.is_atom() => {
                for t in f.atom_terms() {
                    t.visit(&mut |x| {
                        if let Term::Var(v) = x {
                            if !bound.contains(v) {
                                out.insert(v.clone());
                            }
                        }
                    });
                }
            }
            f => {
                for c in f.children() {
                    c.free_vars_into(out, bound);
                }
            }
        }
    }

    pub fn has_free(&self, v: &Var) -> bool {
        self.free_vars().contains(v)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All variable names, free or bound; used to pick fresh names.
    pub fn all_names(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.name.clone());
            }
        });
        self.visit_binders(&mut |v| {
            out.insert(v.name.clone());
        });
        out
    }

    /// Number of nodes (formula and term), a rough size measure.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit_terms(&mut |_| n += 1);
        fn count(f: &Formula) -> usize {
            1 + f.children().into_iter().map(count).sum::<usize>()
        }
        n + count(self)
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Formula::False)
    }

    /// Conjuncts of a (possibly nested) conjunction.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(|f| f.conjuncts()).collect(),
            Formula::True => vec![],
            f => vec![f],
        }
    }

    pub fn disjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::Or(fs) => fs.iter().flat_map(|f| f.disjuncts()).collect(),
            Formula::False => vec![],
            f => vec![f],
        }
    }
}

impl std::ops::Not for Formula {
    type Output = Formula;
    fn not(self) -> Formula {
        Formula::not(self)
    }
}
