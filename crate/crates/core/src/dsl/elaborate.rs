//! Sort checking and name resolution: turns parsed sections into a
//! [`Theory`].

use std::collections::BTreeSet;

use num_traits::Zero;

use super::lexer::Span;
use super::parser::{BinOp, Binder, Case, CmpKind, Expr, ExprKind, Item, Param, Section};
use super::theory::*;
use crate::logic::{Formula, Rat, Sort, Symbol, Term, Var};

type ER<T> = Result<T, Diagnostic>;

fn err<T>(code: &'static str, msg: impl Into<String>, span: Span) -> ER<T> {
    Err(Diagnostic::error(code, msg, Some(span)))
}

const RESERVED: [&str; 12] = [
    "real",
    "time",
    "action",
    "situation",
    "S0",
    "do",
    "start",
    "time",
    "Poss",
    "true",
    "false",
    "_",
];

/// Evaluates ground arithmetic built from numerals.
fn const_value(t: &Term) -> Option<Rat> {
    match t {
        Term::Num(r) => Some(r.clone()),
        Term::Arith(op, a, b) => {
            let (a, b) = (const_value(a)?, const_value(b)?);
            Some(match op {
                crate::logic::ArithOp::Add => a + b,
                crate::logic::ArithOp::Sub => a - b,
                crate::logic::ArithOp::Mul => a * b,
            })
        }
        _ => None,
    }
}

/// Resolves expressions against a theory's declarations.
pub struct Elaborator<'a> {
    th: &'a Theory,
    scope: Vec<Var>,
    /// Situation supplied for fluent applications that omit it.
    implicit_sit: Option<Term>,
    /// Nonlinear products are permitted inside definitions.
    in_def: bool,
}

impl<'a> Elaborator<'a> {
    pub fn new(th: &'a Theory) -> Self {
        Elaborator {
            th,
            scope: Vec::new(),
            implicit_sit: None,
            in_def: false,
        }
    }

    pub fn with_implicit_situation(mut self, sit: Term) -> Self {
        self.implicit_sit = Some(sit);
        self
    }

    pub fn with_scope(mut self, vars: Vec<Var>) -> Self {
        self.scope = vars;
        self
    }

    fn sort_named(&self, name: &str, span: Span) -> ER<Sort> {
        match name {
            "real" | "time" => Ok(Sort::Real),
            "action" => Ok(Sort::Action),
            "situation" => Ok(Sort::Situation),
            _ if self.th.sort(name).is_some() => Ok(Sort::object(name)),
            _ => err("unknown-sort", format!("unknown sort `{name}`"), span),
        }
    }

    fn var(&self, name: &str) -> Option<&Var> {
        self.scope.iter().rev().find(|v| v.name == name)
    }

    fn check_binder_name(&self, name: &str, span: Span) -> ER<()> {
        if RESERVED.contains(&name) {
            return err(
                "reserved",
                format!("`{name}` is reserved and cannot name a variable"),
                span,
            );
        }
        if self.th.object_sort(name).is_some() {
            return err(
                "shadowing",
                format!("variable `{name}` shadows an object constant"),
                span,
            );
        }
        if self.th.lookup(name).is_some() {
            return err(
                "shadowing",
                format!("variable `{name}` shadows a declared symbol"),
                span,
            );
        }
        Ok(())
    }

    fn expect_sort(&self, t: Term, found: Sort, expected: &Sort, span: Span) -> ER<Term> {
        if &found == expected {
            Ok(t)
        } else {
            err(
                "sort",
                format!("expected a term of sort {expected}, found {found}"),
                span,
            )
        }
    }

    pub fn term_of(&mut self, e: &Expr, expected: &Sort) -> ER<Term> {
        let (t, s) = self.term(e)?;
        self.expect_sort(t, s, expected, e.span)
    }

    fn real(&mut self, e: &Expr) -> ER<Term> {
        self.term_of(e, &Sort::Real)
    }

    fn args_of(&mut self, sorts: &[Sort], args: &[Expr]) -> ER<Vec<Term>> {
        sorts
            .iter()
            .zip(args)
            .map(|(s, a)| self.term_of(a, s))
            .collect()
    }

    fn arity(name: &str, want: usize, got: usize, span: Span) -> ER<()> {
        if want == got {
            Ok(())
        } else {
            err(
                "arity",
                format!("`{name}` expects {want} argument(s), got {got}"),
                span,
            )
        }
    }

    /// Splits fluent arguments into object arguments, the optional time, and
    /// the situation (possibly implicit).
    fn fluent_args(
        &mut self,
        decl: &FluentDecl,
        args: &[Expr],
        span: Span,
    ) -> ER<(Vec<Term>, Option<Term>, Term)> {
        let temporal = decl.kind == FluentKind::Temporal;
        let full = decl.params.len() + usize::from(temporal) + 1;
        let explicit_sit = if args.len() == full {
            true
        } else if args.len() + 1 == full && self.implicit_sit.is_some() {
            false
        } else {
            return Self::arity(&decl.name, full, args.len(), span).map(|_| unreachable!());
        };
        let n = decl.params.len();
        let objs = self.args_of(&decl.params, &args[..n])?;
        let time = if temporal {
            Some(self.real(&args[n])?)
        } else {
            None
        };
        let sit = if explicit_sit {
            self.term_of(&args[full - 1], &Sort::Situation)?
        } else {
            self.implicit_sit.clone().unwrap()
        };
        Ok((objs, time, sit))
    }

    pub fn term(&mut self, e: &Expr) -> ER<(Term, Sort)> {
        let span = e.span;
        match &e.kind {
            ExprKind::Num(r) => Ok((Term::Num(r.clone()), Sort::Real)),
            ExprKind::Neg(inner) => {
                let t = self.real(inner)?;
                Ok((
                    match t {
                        Term::Num(r) => Term::Num(-r),
                        t => Term::mul(Term::int(-1), t),
                    },
                    Sort::Real,
                ))
            }
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (self.real(a)?, self.real(b)?);
                let t = match op {
                    BinOp::Add => Term::add(a, b),
                    BinOp::Sub => Term::sub(a, b),
                    BinOp::Mul => Term::mul(a, b),
                    BinOp::Div => {
                        let Some(d) = const_value(&b) else {
                            return err("nonlinear", "divisor must be a numeric constant", span);
                        };
                        if d.is_zero() {
                            return err("arith", "division by zero", span);
                        }
                        match a {
                            Term::Num(n) => Term::Num(n / d),
                            a => Term::mul(a, Term::Num(Rat::from_integer(1.into()) / d)),
                        }
                    }
                };
                Ok((t, Sort::Real))
            }
            ExprKind::Ident(name) => {
                if let Some(v) = self.var(name) {
                    return Ok((Term::Var(v.clone()), v.sort.clone()));
                }
                if name == "S0" {
                    return Ok((Term::S0, Sort::Situation));
                }
                match self.th.lookup(name) {
                    Some(SymbolRef::Object(s)) => Ok((Term::obj(name), Sort::object(&s.name))),
                    Some(SymbolRef::Static(d)) => match &d.kind {
                        StaticKind::Fun(s) if d.params.is_empty() => {
                            Ok((Term::stat(name, vec![]), s.clone()))
                        }
                        StaticKind::Fun(_) => {
                            Self::arity(name, d.params.len(), 0, span).map(|_| unreachable!())
                        }
                        StaticKind::Pred => {
                            err("sort", format!("predicate `{name}` used as a term"), span)
                        }
                    },
                    Some(SymbolRef::Fluent(d)) if d.kind != FluentKind::Rel => {
                        let d = d.clone();
                        self.fluent_term(&d, &[], span)
                    }
                    Some(SymbolRef::Fluent(_)) => err(
                        "sort",
                        format!("relational fluent `{name}` used as a term"),
                        span,
                    ),
                    Some(SymbolRef::Action(d)) => {
                        Self::arity(name, d.params.len() + 1, 0, span).map(|_| unreachable!())
                    }
                    None => err(
                        "unbound-variable",
                        format!("unknown symbol or unbound variable `{name}`"),
                        span,
                    ),
                }
            }
            ExprKind::App(name, args) => self.app_term(name, args, span),
            _ => err("sort", "expected a term, found a formula", span),
        }
    }

    fn fluent_term(&mut self, d: &FluentDecl, args: &[Expr], span: Span) -> ER<(Term, Sort)> {
        let (objs, time, sit) = self.fluent_args(d, args, span)?;
        let sort = d.value_sort().unwrap();
        Ok((
            match time {
                Some(t) => Term::Temporal(d.name.clone(), objs, Box::new(t), Box::new(sit)),
                None => Term::Fluent(d.name.clone(), objs, Box::new(sit)),
            },
            sort,
        ))
    }

    fn app_term(&mut self, name: &str, args: &[Expr], span: Span) -> ER<(Term, Sort)> {
        match name {
            "do" => {
                Self::arity(name, 2, args.len(), span)?;
                let a = self.term_of(&args[0], &Sort::Action)?;
                let s = self.term_of(&args[1], &Sort::Situation)?;
                return Ok((Term::do_(a, s), Sort::Situation));
            }
            "start" => {
                Self::arity(name, 1, args.len(), span)?;
                return Ok((
                    Term::start(self.term_of(&args[0], &Sort::Situation)?),
                    Sort::Real,
                ));
            }
            "time" => {
                Self::arity(name, 1, args.len(), span)?;
                return Ok((
                    Term::time(self.term_of(&args[0], &Sort::Action)?),
                    Sort::Real,
                ));
            }
            _ => {}
        }
        match self.th.lookup(name) {
            Some(SymbolRef::Action(d)) => {
                Self::arity(name, d.params.len() + 1, args.len(), span)?;
                let params = d.params.clone();
                let objs = self.args_of(&params, &args[..params.len()])?;
                let time = self.real(&args[params.len()])?;
                Ok((
                    Term::Action {
                        functor: Symbol::new(name),
                        args: objs,
                        time: Box::new(time),
                    },
                    Sort::Action,
                ))
            }
            Some(SymbolRef::Static(d)) => match &d.kind {
                StaticKind::Fun(s) => {
                    let (params, s) = (d.params.clone(), s.clone());
                    Self::arity(name, params.len(), args.len(), span)?;
                    Ok((Term::stat(name, self.args_of(&params, args)?), s))
                }
                StaticKind::Pred => err("sort", format!("predicate `{name}` used as a term"), span),
            },
            Some(SymbolRef::Fluent(d)) if d.kind != FluentKind::Rel => {
                let d = d.clone();
                self.fluent_term(&d, args, span)
            }
            Some(SymbolRef::Fluent(_)) => err(
                "sort",
                format!("relational fluent `{name}` used as a term"),
                span,
            ),
            Some(SymbolRef::Object(_)) => err(
                "arity",
                format!("object constant `{name}` takes no arguments"),
                span,
            ),
            None => err("unknown-symbol", format!("unknown function `{name}`"), span),
        }
    }

    pub fn formula(&mut self, e: &Expr) -> ER<Formula> {
        let f = self.formula_inner(e)?;
        if !self.in_def && !f.atoms_linear() {
            return err(
                "nonlinear",
                "product of two terms mentioning real-valued variables",
                e.span,
            );
        }
        Ok(f)
    }

    fn formula_inner(&mut self, e: &Expr) -> ER<Formula> {
        let span = e.span;
        match &e.kind {
            ExprKind::Ident(name) => match name.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                _ if self.var(name).is_some() => {
                    err("sort", format!("variable `{name}` used as a formula"), span)
                }
                _ => self.app_formula(name, &[], span),
            },
            ExprKind::App(name, args) => self.app_formula(name, args, span),
            ExprKind::Cmp(op, a, b) => {
                if *op == CmpKind::Prec {
                    let a = self.term_of(a, &Sort::Situation)?;
                    let b = self.term_of(b, &Sort::Situation)?;
                    return Ok(Formula::Precedes(a, b));
                }
                if matches!(op, CmpKind::Eq | CmpKind::Ne) {
                    let (ta, sa) = self.term(a)?;
                    let (tb, sb) = self.term(b)?;
                    if sa != sb {
                        return err("sort", format!("cannot compare {sa} with {sb}"), span);
                    }
                    let f = Formula::Eq(ta, tb);
                    return Ok(if *op == CmpKind::Eq {
                        f
                    } else {
                        Formula::not(f)
                    });
                }
                let (a, b) = (self.real(a)?, self.real(b)?);
                Ok(match op {
                    CmpKind::Lt => Formula::lt(a, b),
                    CmpKind::Le => Formula::le(a, b),
                    CmpKind::Gt => Formula::lt(b, a),
                    CmpKind::Ge => Formula::le(b, a),
                    _ => unreachable!(),
                })
            }
            ExprKind::Not(a) => Ok(Formula::not(self.formula_inner(a)?)),
            ExprKind::And(parts) => Ok(Formula::And(
                parts
                    .iter()
                    .map(|p| self.formula_inner(p))
                    .collect::<ER<_>>()?,
            )),
            ExprKind::Or(parts) => Ok(Formula::Or(
                parts
                    .iter()
                    .map(|p| self.formula_inner(p))
                    .collect::<ER<_>>()?,
            )),
            ExprKind::Implies(a, b) => Ok(Formula::implies(
                self.formula_inner(a)?,
                self.formula_inner(b)?,
            )),
            ExprKind::Iff(a, b) => Ok(Formula::iff(self.formula_inner(a)?, self.formula_inner(b)?)),
            ExprKind::Quant(exists, binders, body) => {
                let vars = self.bind(binders)?;
                let n = vars.len();
                self.scope.extend(vars.iter().cloned());
                let body = self.formula_inner(body);
                self.scope.truncate(self.scope.len() - n);
                let body = body?;
                Ok(if *exists {
                    Formula::exists_many(vars, body)
                } else {
                    Formula::forall_many(vars, body)
                })
            }
            _ => err("sort", "expected a formula, found a term", span),
        }
    }

    fn bind(&self, binders: &[Binder]) -> ER<Vec<Var>> {
        let mut out: Vec<Var> = Vec::new();
        for b in binders {
            self.check_binder_name(&b.name, b.span)?;
            if out.iter().any(|v| v.name == b.name.as_str()) {
                return err(
                    "duplicate",
                    format!("variable `{}` bound twice", b.name),
                    b.span,
                );
            }
            out.push(Var::new(&b.name, self.sort_named(&b.sort, b.span)?));
        }
        Ok(out)
    }

    fn app_formula(&mut self, name: &str, args: &[Expr], span: Span) -> ER<Formula> {
        if name == "Poss" {
            Self::arity(name, 2, args.len(), span)?;
            let a = self.term_of(&args[0], &Sort::Action)?;
            let s = self.term_of(&args[1], &Sort::Situation)?;
            return Ok(Formula::Poss(a, s));
        }
        match self.th.lookup(name) {
            Some(SymbolRef::Static(d)) if d.kind == StaticKind::Pred => {
                let params = d.params.clone();
                Self::arity(name, params.len(), args.len(), span)?;
                Ok(Formula::pred(name, self.args_of(&params, args)?))
            }
            Some(SymbolRef::Fluent(d)) if d.kind == FluentKind::Rel => {
                let d = d.clone();
                let (objs, _, sit) = self.fluent_args(&d, args, span)?;
                Ok(Formula::Rel(d.name.clone(), objs, sit))
            }
            Some(_) => err("sort", format!("`{name}` is not a predicate"), span),
            None => err(
                "unknown-symbol",
                format!("unknown predicate `{name}`"),
                span,
            ),
        }
    }
}

trait LinearCheck {
    fn atoms_linear(&self) -> bool;
}

impl LinearCheck for Formula {
    fn atoms_linear(&self) -> bool {
        !self.any_term(&mut |t| !t.is_linear())
    }
}

/// Head argument that must be a fresh variable name.
fn head_var(e: &Expr) -> ER<(&str, Span)> {
    match &e.kind {
        ExprKind::Ident(n) => Ok((n, e.span)),
        _ => err("head", "expected a variable in the axiom head", e.span),
    }
}

struct HeadBuilder<'b, 'a> {
    el: &'b Elaborator<'a>,
    vars: Vec<Var>,
}

impl HeadBuilder<'_, '_> {
    fn push(&mut self, e: &Expr, sort: Sort) -> ER<Var> {
        let (name, span) = head_var(e)?;
        self.el.check_binder_name(name, span)?;
        if self.vars.iter().any(|v| v.name == name) {
            return err(
                "head",
                format!("variable `{name}` repeated in the axiom head"),
                span,
            );
        }
        let v = Var::new(name, sort);
        self.vars.push(v.clone());
        Ok(v)
    }
}

/// `App(name, args)` destructuring with a span-carrying error.
fn app<'e>(e: &'e Expr, what: &str) -> ER<(&'e str, &'e [Expr])> {
    match &e.kind {
        ExprKind::App(n, a) => Ok((n, a)),
        ExprKind::Ident(n) => Ok((n, &[])),
        _ => err("head", format!("expected {what}"), e.span),
    }
}

/// `do(a, s)` in a head.
fn do_head(e: &Expr) -> ER<(&Expr, &Expr)> {
    match app(e, "`do(a, s)`")? {
        ("do", [a, s]) => Ok((a, s)),
        _ => err(
            "head",
            "expected `do(a, s)` as the situation argument",
            e.span,
        ),
    }
}

struct Ctx {
    th: Theory,
    diags: Vec<Diagnostic>,
}

impl Ctx {
    fn report<T>(&mut self, r: ER<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(d) => {
                self.diags.push(d);
                None
            }
        }
    }

    fn declare_name(&mut self, name: &str, span: Span) -> bool {
        if RESERVED.contains(&name) {
            self.diags.push(Diagnostic::error(
                "reserved",
                format!("`{name}` is reserved"),
                Some(span),
            ));
            return false;
        }
        if self.th.lookup(name).is_some() || self.th.sort(name).is_some() {
            self.diags.push(Diagnostic::error(
                "duplicate",
                format!("`{name}` is declared more than once"),
                Some(span),
            ));
            return false;
        }
        true
    }

    fn sort_named(&self, name: &str, span: Span) -> ER<Sort> {
        Elaborator::new(&self.th).sort_named(name, span)
    }

    fn object_sorts(&self, names: &[String], span: Span, what: &str) -> ER<Vec<Sort>> {
        names
            .iter()
            .map(|n| {
                let s = self.sort_named(n, span)?;
                if !s.is_object() {
                    return err(
                        "sort",
                        format!("{what} parameters must be object sorts, found {s}"),
                        span,
                    );
                }
                Ok(s)
            })
            .collect()
    }
}

/// Elaborates parsed sections. Declarations are collected first so that
/// axioms may refer to symbols declared in later sections.
pub fn elaborate(sections: &[Section]) -> (Theory, Vec<Diagnostic>) {
    let mut cx = Ctx {
        th: Theory::default(),
        diags: Vec::new(),
    };
    let items = |name: &'static str| {
        sections
            .iter()
            .filter(move |s| s.name == name)
            .flat_map(|s| s.items.iter())
    };

    for (item, span) in items("sorts") {
        if let Item::Sort { name, objects } = item {
            if !cx.declare_name(name, *span) {
                continue;
            }
            let mut objs: Vec<Symbol> = Vec::new();
            for o in objects {
                if objs.iter().any(|x| x == o.as_str()) || !cx.declare_name(o, *span) {
                    if objs.iter().any(|x| x == o.as_str()) {
                        cx.diags.push(Diagnostic::error(
                            "duplicate",
                            format!("object `{o}` listed twice"),
                            Some(*span),
                        ));
                    }
                    continue;
                }
                objs.push(Symbol::new(o));
            }
            cx.th.sorts.push(SortDecl {
                name: Symbol::new(name),
                objects: objs,
            });
        }
    }

    let mut pending_defs: Vec<(usize, Vec<Param>, &Expr)> = Vec::new();
    for (item, span) in items("statics") {
        if let Item::Static {
            pred,
            name,
            params,
            result,
            def,
        } = item
        {
            if !cx.declare_name(name, *span) {
                continue;
            }
            let sorts: ER<Vec<Sort>> = params
                .iter()
                .map(|p| cx.sort_named(&p.sort, *span))
                .collect();
            let Some(sorts) = cx.report(sorts) else {
                continue;
            };
            let kind = match result {
                None => StaticKind::Pred,
                Some(r) => match cx.sort_named(r, *span) {
                    Ok(s @ (Sort::Real | Sort::Object(_))) => StaticKind::Fun(s),
                    Ok(s) => {
                        cx.diags.push(Diagnostic::error(
                            "sort",
                            format!("static functions cannot return {s}"),
                            Some(*span),
                        ));
                        continue;
                    }
                    Err(d) => {
                        cx.diags.push(d);
                        continue;
                    }
                },
            };
            debug_assert_eq!(*pred, kind == StaticKind::Pred);
            match def {
                Some(body) => {
                    if params.iter().any(|p| p.name.is_none()) {
                        cx.diags.push(Diagnostic::error(
                            "head",
                            format!("definition of `{name}` must name its parameters"),
                            Some(*span),
                        ));
                        continue;
                    }
                    pending_defs.push((cx.th.statics.len(), params.clone(), body));
                }
                None => {
                    if sorts.iter().any(|s| !s.is_object()) {
                        cx.diags.push(Diagnostic::error(
                            "sort",
                            format!("table-defined static `{name}` needs object-sorted parameters; use `def` otherwise"),
                            Some(*span),
                        ));
                        continue;
                    }
                }
            }
            cx.th.statics.push(StaticDecl {
                name: Symbol::new(name),
                params: sorts,
                kind,
                def: None,
            });
        }
    }

    for (item, span) in items("actions") {
        if let Item::Action {
            natural,
            name,
            sorts,
        } = item
        {
            if !cx.declare_name(name, *span) {
                continue;
            }
            let params: ER<Vec<Sort>> = sorts
                .iter()
                .map(|n| match cx.sort_named(n, *span)? {
                    s @ (Sort::Real | Sort::Object(_)) => Ok(s),
                    s => err(
                        "sort",
                        format!("action parameters cannot have sort {s}"),
                        *span,
                    ),
                })
                .collect();
            if let Some(params) = cx.report(params) {
                cx.th.actions.push(ActionDecl {
                    name: Symbol::new(name),
                    params,
                    natural: *natural,
                });
            }
        }
    }

    for (item, span) in items("fluents") {
        if let Item::Fluent {
            kind,
            name,
            sorts,
            result,
        } = item
        {
            if !cx.declare_name(name, *span) {
                continue;
            }
            let Some(params) = cx.report(cx.object_sorts(sorts, *span, "fluent")) else {
                continue;
            };
            let kind = match kind.as_str() {
                "rel" => FluentKind::Rel,
                "temporal" => FluentKind::Temporal,
                _ => match cx.sort_named(result.as_deref().unwrap_or_default(), *span) {
                    Ok(s @ (Sort::Real | Sort::Object(_))) => FluentKind::Fun(s),
                    Ok(s) => {
                        cx.diags.push(Diagnostic::error(
                            "sort",
                            format!("fluents cannot take values of sort {s}"),
                            Some(*span),
                        ));
                        continue;
                    }
                    Err(d) => {
                        cx.diags.push(d);
                        continue;
                    }
                },
            };
            let temporal = kind == FluentKind::Temporal;
            cx.th.fluents.push(FluentDecl {
                name: Symbol::new(name),
                params: params.clone(),
                kind,
            });
            if temporal {
                let companion = init_name(name);
                if cx.declare_name(&companion, *span) {
                    cx.th.fluents.push(FluentDecl {
                        name: Symbol::new(&companion),
                        params,
                        kind: FluentKind::Init {
                            of: Symbol::new(name),
                        },
                    });
                }
            }
        }
    }

    // Definitions, in declaration order; a body may use only definitions
    // declared before it.
    for (idx, params, body) in pending_defs {
        let span = body.span;
        let decl = cx.th.statics[idx].clone();
        let vars: Vec<Var> = params
            .iter()
            .zip(&decl.params)
            .map(|(p, s)| Var::new(p.name.as_deref().unwrap(), s.clone()))
            .collect();
        let mut el = Elaborator::new(&cx.th).with_scope(vars.clone());
        el.in_def = true;
        let body = match &decl.kind {
            StaticKind::Pred => el.formula(body).map(DefBody::Formula),
            StaticKind::Fun(s) => el.term_of(body, s).map(DefBody::Term),
        };
        let Some(body) = cx.report(body) else {
            continue;
        };
        let situational = match &body {
            DefBody::Term(t) => t.is_situational(),
            DefBody::Formula(f) => {
                f.any_term(&mut |t| t.is_situational())
                    || f.any_atom(&mut |a| matches!(a, Formula::Rel(..) | Formula::Poss(..)))
            }
        };
        if situational {
            cx.diags.push(Diagnostic::error(
                "definition",
                format!(
                    "definition of `{}` must not mention fluents or situations",
                    decl.name
                ),
                Some(span),
            ));
            continue;
        }
        let later: Vec<&str> = cx.th.statics[idx..]
            .iter()
            .filter(|d| def_mentions(&body, &d.name))
            .map(|d| d.name.as_str())
            .collect();
        if !later.is_empty() {
            cx.diags.push(Diagnostic::error(
                "definition-order",
                format!(
                    "definition of `{}` refers to `{}`, which is not defined before it",
                    decl.name,
                    later.join("`, `")
                ),
                Some(span),
            ));
            continue;
        }
        cx.th.statics[idx].def = Some(Definition { params: vars, body });
    }

    for (item, span) in items("poss") {
        if let Item::Formula(e) = item {
            let r = poss_axiom(&cx.th, e, *span);
            if let Some(p) = cx.report(r) {
                if cx.th.poss_for(&p.action).is_some() {
                    cx.diags.push(Diagnostic::error(
                        "duplicate",
                        format!("second precondition axiom for `{}`", p.action),
                        Some(*span),
                    ));
                } else {
                    cx.th.poss.push(p);
                }
            }
        }
    }

    for (item, span) in items("ssa") {
        if let Item::Formula(e) = item {
            let r = ssa_axiom(&cx.th, e, *span);
            if let Some(p) = cx.report(r) {
                if cx.th.ssa_for(&p.fluent).is_some() {
                    cx.diags.push(Diagnostic::error(
                        "duplicate",
                        format!("second successor state axiom for `{}`", p.fluent),
                        Some(*span),
                    ));
                } else {
                    cx.th.ssas.push(p);
                }
            }
        }
    }

    for (item, span) in items("init-ssa") {
        if let Item::InitSsa { head, cases } = item {
            let r = init_ssa(&cx.th, head, cases, *span);
            if let Some(p) = cx.report(r) {
                if cx.th.init_ssa_for(&p.fluent).is_some() {
                    cx.diags.push(Diagnostic::error(
                        "duplicate",
                        format!("second init axiom for `{}`", p.fluent),
                        Some(*span),
                    ));
                } else {
                    cx.th.init_ssas.push(p);
                }
            }
        }
    }

    for (item, span) in items("tca") {
        if let Item::Tca { head, context, law } = item {
            let r = tca(&cx.th, head, context, law, *span);
            if let Some(t) = cx.report(r) {
                cx.th.tcas.push(t);
            }
        }
    }

    for (item, span) in items("init") {
        if let Item::Formula(e) = item {
            let r = init_item(&mut cx.th, e, *span);
            cx.report(r);
        }
    }

    for (item, span) in items("constraints") {
        if let Item::Formula(e) = item {
            let mut el = Elaborator::new(&cx.th).with_implicit_situation(Term::S0);
            let r = el.formula(e).and_then(|f| {
                if !f.is_closed() {
                    let names: Vec<String> =
                        f.free_vars().iter().map(|v| v.name.to_string()).collect();
                    return err(
                        "unbound-variable",
                        format!("constraint has free variables: {}", names.join(", ")),
                        *span,
                    );
                }
                if !crate::logic::is_uniform_in(&f, &Term::S0) {
                    return err(
                        "non-uniform",
                        "state constraints must be uniform in S0",
                        *span,
                    );
                }
                Ok(f)
            });
            if let Some(f) = cx.report(r) {
                cx.th.constraints.push(Constraint {
                    formula: f,
                    span: *span,
                });
            }
        }
    }

    (cx.th, cx.diags)
}

fn def_mentions(body: &DefBody, name: &Symbol) -> bool {
    let in_term = |t: &Term| t.any(&mut |x| matches!(x, Term::Static(n, _) if n == name));
    match body {
        DefBody::Term(t) => in_term(t),
        DefBody::Formula(f) => {
            f.any_term(&mut |x| matches!(x, Term::Static(n, _) if n == name))
                || f.any_atom(&mut |a| matches!(a, Formula::Pred(n, _) if n == name))
        }
    }
}

fn free_var_check(f: &Formula, allowed: &[Var], span: Span, what: &str) -> ER<()> {
    let extra: Vec<String> = f
        .free_vars()
        .iter()
        .filter(|v| !allowed.contains(v))
        .map(|v| v.name.to_string())
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        err(
            "unbound-variable",
            format!("{what} mentions unbound variable(s): {}", extra.join(", ")),
            span,
        )
    }
}

fn iff_parts<'e>(e: &'e Expr, what: &str) -> ER<(&'e Expr, &'e Expr)> {
    match &e.kind {
        ExprKind::Iff(a, b) => Ok((a, b)),
        _ => err(
            "head",
            format!("{what} must have the form `head <-> body`"),
            e.span,
        ),
    }
}

fn poss_axiom(th: &Theory, e: &Expr, span: Span) -> ER<PossAxiom> {
    let (lhs, rhs) = iff_parts(e, "a precondition axiom")?;
    let (a, s) = match app(lhs, "`Poss(A(..), s)`")? {
        ("Poss", [a, s]) => (a, s),
        _ => return err("head", "expected `Poss(A(..), s)` on the left", lhs.span),
    };
    let (functor, args) = app(a, "an action pattern")?;
    let Some(decl) = th.action(functor) else {
        return err(
            "unknown-symbol",
            format!("unknown action `{functor}`"),
            a.span,
        );
    };
    Elaborator::arity(functor, decl.params.len() + 1, args.len(), a.span)?;
    let el = Elaborator::new(th);
    let mut hb = HeadBuilder {
        el: &el,
        vars: vec![],
    };
    let params = decl
        .params
        .iter()
        .zip(args)
        .map(|(s, x)| hb.push(x, s.clone()))
        .collect::<ER<Vec<_>>>()?;
    let time = hb.push(&args[decl.params.len()], Sort::Real)?;
    let sit = hb.push(s, Sort::Situation)?;
    let scope = hb.vars;
    let f = Elaborator::new(th).with_scope(scope.clone()).formula(rhs)?;
    free_var_check(&f, &scope, span, "precondition")?;
    Ok(PossAxiom {
        action: Symbol::new(functor),
        params,
        time,
        sit,
        rhs: f,
        span,
    })
}

fn ssa_axiom(th: &Theory, e: &Expr, span: Span) -> ER<Ssa> {
    let (lhs, rhs) = iff_parts(e, "a successor state axiom")?;
    let (fl, value_expr) = match &lhs.kind {
        ExprKind::Cmp(CmpKind::Eq, a, y) => (&**a, Some(&**y)),
        _ => (lhs, None),
    };
    let (name, args) = app(fl, "a fluent applied to `do(a, s)`")?;
    let Some(decl) = th.fluent(name) else {
        return err(
            "unknown-symbol",
            format!("unknown fluent `{name}`"),
            fl.span,
        );
    };
    match (&decl.kind, value_expr.is_some()) {
        (FluentKind::Rel, false) | (FluentKind::Fun(_), true) => {}
        (FluentKind::Rel, true) => {
            return err(
                "head",
                format!("relational fluent `{name}` takes no value"),
                lhs.span,
            )
        }
        (FluentKind::Fun(_), false) => {
            return err(
                "head",
                format!("functional fluent `{name}` needs `= y` in its axiom head"),
                lhs.span,
            )
        }
        (FluentKind::Temporal, _) => return err(
            "head",
            format!(
                "temporal fluent `{name}` is defined by change axioms, not a successor state axiom"
            ),
            lhs.span,
        ),
        (FluentKind::Init { .. }, _) => {
            return err(
                "head",
                format!("`{name}` is defined in the init-ssa section"),
                lhs.span,
            )
        }
    }
    Elaborator::arity(name, decl.params.len() + 1, args.len(), fl.span)?;
    let el = Elaborator::new(th);
    let mut hb = HeadBuilder {
        el: &el,
        vars: vec![],
    };
    let params = decl
        .params
        .iter()
        .zip(args)
        .map(|(s, x)| hb.push(x, s.clone()))
        .collect::<ER<Vec<_>>>()?;
    let (a, s) = do_head(&args[decl.params.len()])?;
    let action = hb.push(a, Sort::Action)?;
    let sit = hb.push(s, Sort::Situation)?;
    let value = match value_expr {
        Some(y) => Some(hb.push(y, decl.value_sort().unwrap())?),
        None => None,
    };
    let scope = hb.vars;
    let f = Elaborator::new(th).with_scope(scope.clone()).formula(rhs)?;
    free_var_check(&f, &scope, span, "successor state axiom")?;
    Ok(Ssa {
        fluent: decl.name.clone(),
        params,
        value,
        action,
        sit,
        rhs: f,
        span,
    })
}

fn init_ssa(th: &Theory, head: &Expr, cases: &[Case], span: Span) -> ER<InitSsaDecl> {
    let (name, args) = app(head, "`f_init(.., do(a, s))`")?;
    let Some(decl) = th.fluent(name) else {
        return err(
            "unknown-symbol",
            format!("unknown fluent `{name}`"),
            head.span,
        );
    };
    let FluentKind::Init { of } = &decl.kind else {
        return err(
            "head",
            format!("`{name}` is not the init companion of a temporal fluent"),
            head.span,
        );
    };
    Elaborator::arity(name, decl.params.len() + 1, args.len(), head.span)?;
    let el = Elaborator::new(th);
    let mut hb = HeadBuilder {
        el: &el,
        vars: vec![],
    };
    let params = decl
        .params
        .iter()
        .zip(args)
        .map(|(s, x)| hb.push(x, s.clone()))
        .collect::<ER<Vec<_>>>()?;
    let (a, s) = do_head(&args[decl.params.len()])?;
    let action = hb.push(a, Sort::Action)?;
    let sit = hb.push(s, Sort::Situation)?;
    let head_vars = hb.vars;

    let mut out = Vec::new();
    for c in cases {
        let (functor, pargs) = app(&c.pattern, "an action pattern")?;
        let Some(adecl) = th.action(functor) else {
            return err(
                "unknown-symbol",
                format!("unknown action `{functor}`"),
                c.pattern.span,
            );
        };
        Elaborator::arity(functor, adecl.params.len() + 1, pargs.len(), c.pattern.span)?;
        let sorts: Vec<Sort> = adecl
            .params
            .iter()
            .cloned()
            .chain(std::iter::once(Sort::Real))
            .collect();
        let mut fresh: Vec<Var> = Vec::new();
        let mut terms = Vec::new();
        for (sort, pe) in sorts.iter().zip(pargs) {
            let t = match &pe.kind {
                ExprKind::Ident(n) if head_vars.iter().any(|v| v.name == n.as_str()) => {
                    let v = head_vars.iter().find(|v| v.name == n.as_str()).unwrap();
                    if &v.sort != sort {
                        return err(
                            "sort",
                            format!("`{n}` has sort {}, pattern expects {sort}", v.sort),
                            pe.span,
                        );
                    }
                    Term::var(v)
                }
                ExprKind::Ident(n) if th.lookup(n).is_none() && n != "S0" => {
                    if let Some(v) = fresh.iter().find(|v| v.name == n.as_str()) {
                        Term::var(v)
                    } else {
                        el.check_binder_name(n, pe.span)?;
                        let v = Var::new(n, sort.clone());
                        fresh.push(v.clone());
                        Term::var(&v)
                    }
                }
                _ => {
                    let mut el = Elaborator::new(th).with_scope(head_vars.clone());
                    el.term_of(pe, sort)?
                }
            };
            terms.push(t);
        }
        let time = terms.pop().unwrap();
        let mut scope = head_vars.clone();
        scope.extend(fresh.iter().cloned());
        let guard = match &c.guard {
            Some(g) => Elaborator::new(th).with_scope(scope.clone()).formula(g)?,
            None => Formula::True,
        };
        let value = Elaborator::new(th)
            .with_scope(scope.clone())
            .term_of(&c.value, &Sort::Real)?;
        free_var_check(&guard, &scope, c.span, "effect guard")?;
        if !Formula::Eq(value.clone(), value.clone()).atoms_linear() {
            return err(
                "nonlinear",
                "product of two terms mentioning real-valued variables",
                c.value.span,
            );
        }
        out.push(EffectCase {
            action: Symbol::new(functor),
            args: terms,
            time,
            fresh,
            guard,
            value,
            span: c.span,
        });
    }
    Ok(InitSsaDecl {
        fluent: decl.name.clone(),
        of: of.clone(),
        params,
        action,
        sit,
        cases: out,
        span,
    })
}

fn tca(th: &Theory, head: &Expr, context: &Expr, law: &Expr, span: Span) -> ER<Tca> {
    let (fl, y) = match &head.kind {
        ExprKind::Cmp(CmpKind::Eq, a, y) => (&**a, &**y),
        _ => {
            return err(
                "head",
                "a change axiom head has the form `f(x.., t, s) = y`",
                head.span,
            )
        }
    };
    let (name, args) = app(fl, "a temporal fluent")?;
    let Some(decl) = th.fluent(name) else {
        return err(
            "unknown-symbol",
            format!("unknown fluent `{name}`"),
            fl.span,
        );
    };
    if decl.kind != FluentKind::Temporal {
        return err(
            "head",
            format!("`{name}` is not a temporal fluent"),
            fl.span,
        );
    }
    Elaborator::arity(name, decl.params.len() + 2, args.len(), fl.span)?;
    let el = Elaborator::new(th);
    let mut hb = HeadBuilder {
        el: &el,
        vars: vec![],
    };
    let params = decl
        .params
        .iter()
        .zip(args)
        .map(|(s, x)| hb.push(x, s.clone()))
        .collect::<ER<Vec<_>>>()?;
    let time = hb.push(&args[decl.params.len()], Sort::Real)?;
    let sit = hb.push(&args[decl.params.len() + 1], Sort::Situation)?;
    let value = hb.push(y, Sort::Real)?;
    let scope = hb.vars;
    let ctx_scope: Vec<Var> = params
        .iter()
        .cloned()
        .chain(std::iter::once(sit.clone()))
        .collect();

    let gamma = Elaborator::new(th)
        .with_scope(scope.clone())
        .formula(context)?;
    if gamma.has_free(&time) || gamma.has_free(&value) {
        return err(
            "context-time",
            format!(
                "context must be time-independent: it mentions `{}`",
                if gamma.has_free(&time) {
                    &time.name
                } else {
                    &value.name
                }
            ),
            context.span,
        );
    }
    free_var_check(&gamma, &ctx_scope, context.span, "context")?;
    let delta = Elaborator::new(th).with_scope(scope.clone()).formula(law)?;
    free_var_check(&delta, &scope, law.span, "law")?;
    let s = Term::var(&sit);
    for (f, what, sp) in [(&gamma, "context", context.span), (&delta, "law", law.span)] {
        if !crate::logic::is_uniform_in(f, &s) {
            return err(
                "non-uniform",
                format!("{what} must be uniform in `{}`", sit.name),
                sp,
            );
        }
    }
    Ok(Tca {
        fluent: decl.name.clone(),
        params,
        time,
        sit,
        value,
        context: gamma,
        law: delta,
        span,
    })
}

fn fact_args(
    th: &Theory,
    sorts: &[Sort],
    args: &[Expr],
    name: &str,
    span: Span,
) -> ER<Vec<FactArg>> {
    let n = sorts.len();
    let args = match args.len() {
        k if k == n => args,
        k if k == n + 1 => {
            match &args[n].kind {
                ExprKind::Ident(s) if s == "S0" => {}
                _ => {
                    return err(
                        "init",
                        "initial facts may only mention the situation S0",
                        args[n].span,
                    )
                }
            }
            &args[..n]
        }
        k => return Elaborator::arity(name, n, k, span).map(|_| unreachable!()),
    };
    sorts
        .iter()
        .zip(args)
        .map(|(s, a)| match &a.kind {
            ExprKind::Ident(x) if x == "_" => Ok(FactArg::Any),
            _ => {
                let t = Elaborator::new(th).term_of(a, s)?;
                if !t.is_ground() || t.is_situational() {
                    return err("init", "fact arguments must be ground constants", a.span);
                }
                Ok(FactArg::Term(t))
            }
        })
        .collect()
}

fn fact_symbol<'t>(th: &'t Theory, name: &str, span: Span) -> ER<(&'t [Sort], Option<Sort>)> {
    match th.lookup(name) {
        Some(SymbolRef::Static(d)) => {
            if d.def.is_some() {
                return err(
                    "init",
                    format!("`{name}` is defined, not given by facts"),
                    span,
                );
            }
            Ok((
                &d.params,
                match &d.kind {
                    StaticKind::Pred => None,
                    StaticKind::Fun(s) => Some(s.clone()),
                },
            ))
        }
        Some(SymbolRef::Fluent(d)) => {
            if d.kind == FluentKind::Temporal {
                return err(
                    "init",
                    format!(
                        "temporal fluent `{name}` is initialised through `{}`",
                        init_name(name)
                    ),
                    span,
                );
            }
            Ok((&d.params, d.value_sort()))
        }
        Some(_) => err(
            "init",
            format!("`{name}` cannot appear in an initial fact"),
            span,
        ),
        None => err("unknown-symbol", format!("unknown symbol `{name}`"), span),
    }
}

fn init_item(th: &mut Theory, e: &Expr, span: Span) -> ER<()> {
    let (positive, atom) = match &e.kind {
        ExprKind::Not(inner) => (false, &**inner),
        _ => (true, e),
    };
    match &atom.kind {
        ExprKind::Cmp(CmpKind::Eq, lhs, rhs) if positive => {
            let (name, args) = app(lhs, "a function application")?;
            if name == "start" {
                if !(args.is_empty()
                    || matches!(args, [x] if matches!(&x.kind, ExprKind::Ident(s) if s == "S0")))
                {
                    return err("init", "expected `start = r` or `start(S0) = r`", lhs.span);
                }
                let v = Elaborator::new(th).term_of(rhs, &Sort::Real)?;
                let Some(r) = const_value(&v) else {
                    return err("init", "start(S0) must be a numeric constant", rhs.span);
                };
                if th.init.start.is_some() {
                    return err("double-valued", "start(S0) given more than once", span);
                }
                th.init.start = Some(r);
                th.init.start_span = Some(span);
                return Ok(());
            }
            let (sorts, value_sort) = fact_symbol(th, name, lhs.span)?;
            let Some(value_sort) = value_sort else {
                return err(
                    "init",
                    format!("`{name}` is a predicate; write `{name}(..)` or `!{name}(..)`"),
                    span,
                );
            };
            let sorts = sorts.to_vec();
            let args = fact_args(th, &sorts, args, name, lhs.span)?;
            let v = Elaborator::new(th).term_of(rhs, &value_sort)?;
            let v = match const_value(&v) {
                Some(r) => Term::Num(r),
                None if matches!(v, Term::Obj(_)) => v,
                None => {
                    return err(
                        "init",
                        "fact values must be numeric or object constants",
                        rhs.span,
                    )
                }
            };
            th.init.facts.push(Fact {
                symbol: Symbol::new(name),
                args,
                value: FactValue::Is(v),
                span,
            });
            Ok(())
        }
        ExprKind::App(..) | ExprKind::Ident(_) => {
            let (name, args) = app(atom, "a predicate")?;
            let (sorts, value_sort) = fact_symbol(th, name, atom.span)?;
            if value_sort.is_some() {
                return err(
                    "init",
                    format!("`{name}` is a function; write `{name}(..) = value`"),
                    span,
                );
            }
            let sorts = sorts.to_vec();
            let args = fact_args(th, &sorts, args, name, atom.span)?;
            th.init.facts.push(Fact {
                symbol: Symbol::new(name),
                args,
                value: FactValue::Holds(positive),
                span,
            });
            Ok(())
        }
        _ => err(
            "init",
            "initial facts are ground atoms, negated atoms, or `f(..) = value`",
            span,
        ),
    }
}

/// Elaborates a standalone formula, filling in `sit` for fluents written
/// without a situation argument.
pub fn elaborate_formula(th: &Theory, e: &Expr, sit: Term, scope: Vec<Var>) -> ER<Formula> {
    Elaborator::new(th)
        .with_implicit_situation(sit)
        .with_scope(scope)
        .formula(e)
}

/// Like [`elaborate_formula`] without a situation, allowing products of
/// real terms as in definition bodies.
pub fn elaborate_polynomial(th: &Theory, e: &Expr, scope: Vec<Var>) -> ER<Formula> {
    let mut el = Elaborator::new(th).with_scope(scope);
    el.in_def = true;
    el.formula(e)
}

pub fn elaborate_term(
    th: &Theory,
    e: &Expr,
    sit: Option<Term>,
    scope: Vec<Var>,
) -> ER<(Term, Sort)> {
    let mut el = Elaborator::new(th).with_scope(scope);
    el.implicit_sit = sit;
    el.term(e)
}

/// Names used anywhere in a theory's object domains and declarations.
pub fn declared_names(th: &Theory) -> BTreeSet<Symbol> {
    let mut out: BTreeSet<Symbol> = BTreeSet::new();
    for s in &th.sorts {
        out.insert(s.name.clone());
        out.extend(s.objects.iter().cloned());
    }
    out.extend(th.statics.iter().map(|d| d.name.clone()));
    out.extend(th.actions.iter().map(|d| d.name.clone()));
    out.extend(th.fluents.iter().map(|d| d.name.clone()));
    out
}
