use std::collections::BTreeSet;
use std::fmt;

use super::rational::{rat, Rat};
use super::symbol::Symbol;

/// The four basic sorts. Object sorts are named; time is an alias of `Real`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    Object(Symbol),
    Action,
    Situation,
    Real,
}

impl Sort {
    pub fn object(name: &str) -> Self {
        Sort::Object(Symbol::new(name))
    }

    pub fn is_object(&self) -> bool {
        matches!(self, Sort::Object(_))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Object(n) => write!(f, "{n}"),
            Sort::Action => f.write_str("action"),
            Sort::Situation => f.write_str("situation"),
            Sort::Real => f.write_str("real"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var {
    pub name: Symbol,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Self {
        Var {
            name: Symbol::new(name),
            sort,
        }
    }

    pub fn real(name: &str) -> Self {
        Var::new(name, Sort::Real)
    }

    pub fn sit(name: &str) -> Self {
        Var::new(name, Sort::Situation)
    }

    pub fn action(name: &str) -> Self {
        Var::new(name, Sort::Action)
    }

    pub fn with_name(&self, name: Symbol) -> Self {
        Var {
            name,
            sort: self.sort.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Sorted first-order terms.
///
/// Situation terms are `S0` and `Do`; action terms always carry their
/// temporal argument separately from the remaining arguments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Obj(Symbol),
    Num(Rat),
    Action {
        functor: Symbol,
        args: Vec<Term>,
        time: Box<Term>,
    },
    S0,
    Do(Box<Term>, Box<Term>),
    Start(Box<Term>),
    Time(Box<Term>),
    /// Situation-independent function (table-defined or definitional).
    Static(Symbol, Vec<Term>),
    /// Atemporal functional fluent, including the `f_init` companions.
    Fluent(Symbol, Vec<Term>, Box<Term>),
    /// Temporal functional fluent `f(args, time, situation)`.
    Temporal(Symbol, Vec<Term>, Box<Term>, Box<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(v: &Var) -> Term {
        Term::Var(v.clone())
    }

    pub fn num(r: Rat) -> Term {
        Term::Num(r)
    }

    pub fn int(n: i64) -> Term {
        Term::Num(rat(n))
    }

    pub fn obj(name: &str) -> Term {
        Term::Obj(Symbol::new(name))
    }

    pub fn action(functor: &str, args: Vec<Term>, time: Term) -> Term {
        Term::Action {
            functor: Symbol::new(functor),
            args,
            time: Box::new(time),
        }
    }

    pub fn do_(action: Term, sit: Term) -> Term {
        Term::Do(Box::new(action), Box::new(sit))
    }

    /// `do([a1, ..., an], S0)`.
    pub fn do_seq(actions: impl IntoIterator<Item = Term>) -> Term {
        actions.into_iter().fold(Term::S0, |s, a| Term::do_(a, s))
    }

    pub fn start(sit: Term) -> Term {
        Term::Start(Box::new(sit))
    }

    pub fn time(action: Term) -> Term {
        Term::Time(Box::new(action))
    }

    pub fn fluent(name: &str, args: Vec<Term>, sit: Term) -> Term {
        Term::Fluent(Symbol::new(name), args, Box::new(sit))
    }

    pub fn temporal(name: &str, args: Vec<Term>, time: Term, sit: Term) -> Term {
        Term::Temporal(Symbol::new(name), args, Box::new(time), Box::new(sit))
    }

    pub fn stat(name: &str, args: Vec<Term>) -> Term {
        Term::Static(Symbol::new(name), args)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Arith(ArithOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn as_num(&self) -> Option<&Rat> {
        match self {
            Term::Num(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    /// Immediate subterms, in argument order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Obj(_) | Term::Num(_) | Term::S0 => vec![],
            Term::Action { args, time, .. } => {
                args.iter().chain(std::iter::once(&**time)).collect()
            }
            Term::Do(a, s) => vec![a, s],
            Term::Start(x) | Term::Time(x) => vec![x],
            Term::Static(_, args) => args.iter().collect(),
            Term::Fluent(_, args, s) => args.iter().chain(std::iter::once(&**s)).collect(),
            Term::Temporal(_, args, t, s) => args.iter().chain([&**t, &**s]).collect(),
            Term::Arith(_, a, b) => vec![a, b],
        }
    }

    /// Rebuilds the term with `f` applied to each immediate subterm.
    pub fn map_children(&self, mut f: impl FnMut(&Term) -> Term) -> Term {
        match self {
            Term::Var(_) | Term::Obj(_) | Term::Num(_) | Term::S0 => self.clone(),
            Term::Action {
                functor,
                args,
                time,
            } => Term::Action {
                functor: functor.clone(),
                args: args.iter().map(&mut f).collect(),
                time: Box::new(f(time)),
            },
            Term::Do(a, s) => Term::Do(Box::new(f(a)), Box::new(f(s))),
            Term::Start(x) => Term::Start(Box::new(f(x))),
            Term::Time(x) => Term::Time(Box::new(f(x))),
            Term::Static(n, args) => Term::Static(n.clone(), args.iter().map(&mut f).collect()),
            Term::Fluent(n, args, s) => {
                Term::Fluent(n.clone(), args.iter().map(&mut f).collect(), Box::new(f(s)))
            }
            Term::Temporal(n, args, t, s) => {
                let args = args.iter().map(&mut f).collect();
                let t = f(t);
                Term::Temporal(n.clone(), args, Box::new(t), Box::new(f(s)))
            }
            Term::Arith(op, a, b) => Term::Arith(*op, Box::new(f(a)), Box::new(f(b))),
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn any(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn free_vars_into(&self, out: &mut BTreeSet<Var>) {
        self.visit(&mut |t| {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        });
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn mentions_var(&self, v: &Var) -> bool {
        self.any(&mut |t| matches!(t, Term::Var(w) if w == v))
    }

    pub fn is_ground(&self) -> bool {
        !self.any(&mut |t| matches!(t, Term::Var(_)))
    }

    /// For a situation term `do([a1..an], S0)`, the actions in execution
    /// order; `None` if the term is not rooted at `S0`.
    pub fn situation_actions(&self) -> Option<Vec<&Term>> {
        let mut acts = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::S0 => {
                    acts.reverse();
                    return Some(acts);
                }
                Term::Do(a, s) => {
                    acts.push(&**a);
                    cur = s;
                }
                _ => return None,
            }
        }
    }

    /// Number of `do` applications above the root, for situation terms.
    pub fn situation_depth(&self) -> usize {
        match self {
            Term::Do(_, s) => 1 + s.situation_depth(),
            _ => 0,
        }
    }

    /// `Some(situation)` for terms whose head takes a situation argument.
    pub fn situation_arg(&self) -> Option<&Term> {
        match self {
            Term::Fluent(_, _, s) | Term::Temporal(_, _, _, s) | Term::Start(s) => Some(s),
            _ => None,
        }
    }

    /// True when the term mentions a fluent, `start`, or a situation in any
    /// position.
    pub fn is_situational(&self) -> bool {
        self.any(&mut |t| {
            matches!(
                t,
                Term::Fluent(..) | Term::Temporal(..) | Term::Start(_) | Term::S0 | Term::Do(..)
            )
        })
    }

    /// Every `×` node has at most one factor mentioning a real-sorted
    /// variable.
    pub fn is_linear(&self) -> bool {
        !self.any(&mut |t| match t {
            Term::Arith(ArithOp::Mul, a, b) => mentions_real_var(a) && mentions_real_var(b),
            _ => false,
        })
    }
}

fn mentions_real_var(t: &Term) -> bool {
    t.any(&mut |x| matches!(x, Term::Var(v) if v.sort == Sort::Real))
}

impl From<Rat> for Term {
    fn from(r: Rat) -> Self {
        Term::Num(r)
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}
