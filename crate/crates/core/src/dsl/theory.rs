//! The typed action theory produced by elaboration.

use std::fmt;

use serde::Serialize;

use super::lexer::Span;
use crate::logic::{subst_formula, subst_term, Formula, Rat, Sort, Subst, Symbol, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    #[serde(skip)]
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>, span: Option<Span>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>, span: Option<Span>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn location(&self) -> String {
        self.span.map(|s| s.to_string()).unwrap_or_default()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match self.span {
            Some(s) => write!(f, "{s}: {sev}[{}]: {}", self.code, self.message),
            None => write!(f, "{sev}[{}]: {}", self.code, self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SortDecl {
    pub name: Symbol,
    pub objects: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StaticKind {
    Pred,
    Fun(Sort),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DefBody {
    Term(Term),
    Formula(Formula),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub params: Vec<Var>,
    pub body: DefBody,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StaticDecl {
    pub name: Symbol,
    pub params: Vec<Sort>,
    pub kind: StaticKind,
    pub def: Option<Definition>,
}

/// Parameters exclude the implicit trailing time argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionDecl {
    pub name: Symbol,
    pub params: Vec<Sort>,
    pub natural: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FluentKind {
    Rel,
    Fun(Sort),
    Temporal,
    /// Atemporal companion holding the value of `of` at the start of a
    /// situation.
    Init {
        of: Symbol,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluentDecl {
    pub name: Symbol,
    pub params: Vec<Sort>,
    pub kind: FluentKind,
}

impl FluentDecl {
    pub fn value_sort(&self) -> Option<Sort> {
        match &self.kind {
            FluentKind::Rel => None,
            FluentKind::Fun(s) => Some(s.clone()),
            FluentKind::Temporal | FluentKind::Init { .. } => Some(Sort::Real),
        }
    }
}

/// `Poss(A(params, time), sit) <-> rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct PossAxiom {
    pub action: Symbol,
    pub params: Vec<Var>,
    pub time: Var,
    pub sit: Var,
    pub rhs: Formula,
    pub span: Span,
}

impl PossAxiom {
    pub fn action_term(&self) -> Term {
        Term::Action {
            functor: self.action.clone(),
            args: self.params.iter().map(Term::var).collect(),
            time: Box::new(Term::var(&self.time)),
        }
    }
}

/// Successor state axiom for a relational (`value == None`) or atemporal
/// functional fluent.
#[derive(Clone, Debug, PartialEq)]
pub struct Ssa {
    pub fluent: Symbol,
    pub params: Vec<Var>,
    pub value: Option<Var>,
    pub action: Var,
    pub sit: Var,
    pub rhs: Formula,
    pub span: Span,
}

/// One effect case `A(args, time) if guard => value`. Arguments may mention
/// the head parameters; `fresh` lists the existentially read variables.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectCase {
    pub action: Symbol,
    pub args: Vec<Term>,
    pub time: Term,
    pub fresh: Vec<Var>,
    pub guard: Formula,
    pub value: Term,
    pub span: Span,
}

impl EffectCase {
    pub fn action_term(&self) -> Term {
        Term::Action {
            functor: self.action.clone(),
            args: self.args.clone(),
            time: Box::new(self.time.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitSsaDecl {
    pub fluent: Symbol,
    pub of: Symbol,
    pub params: Vec<Var>,
    pub action: Var,
    pub sit: Var,
    pub cases: Vec<EffectCase>,
    pub span: Span,
}

/// `f(params, time, sit) = value when context then law`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tca {
    pub fluent: Symbol,
    pub params: Vec<Var>,
    pub time: Var,
    pub sit: Var,
    pub value: Var,
    pub context: Formula,
    pub law: Formula,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactArg {
    Term(Term),
    Any,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactValue {
    Holds(bool),
    Is(Term),
}

/// A ground initial fact about a static symbol or a fluent at `S0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fact {
    pub symbol: Symbol,
    pub args: Vec<FactArg>,
    pub value: FactValue,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct InitSection {
    pub start: Option<Rat>,
    pub start_span: Option<Span>,
    pub facts: Vec<Fact>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub formula: Formula,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Theory {
    pub sorts: Vec<SortDecl>,
    pub statics: Vec<StaticDecl>,
    pub actions: Vec<ActionDecl>,
    pub fluents: Vec<FluentDecl>,
    pub poss: Vec<PossAxiom>,
    pub ssas: Vec<Ssa>,
    pub init_ssas: Vec<InitSsaDecl>,
    pub tcas: Vec<Tca>,
    pub init: InitSection,
    pub constraints: Vec<Constraint>,
}

/// What a name refers to at top level.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolRef<'a> {
    Object(&'a SortDecl),
    Static(&'a StaticDecl),
    Action(&'a ActionDecl),
    Fluent(&'a FluentDecl),
}

impl Theory {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn static_decl(&self, name: &str) -> Option<&StaticDecl> {
        self.statics.iter().find(|s| s.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|s| s.name == name)
    }

    pub fn fluent(&self, name: &str) -> Option<&FluentDecl> {
        self.fluents.iter().find(|s| s.name == name)
    }

    pub fn object_sort(&self, obj: &str) -> Option<&SortDecl> {
        self.sorts
            .iter()
            .find(|s| s.objects.iter().any(|o| o == obj))
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolRef<'_>> {
        if let Some(s) = self.object_sort(name) {
            return Some(SymbolRef::Object(s));
        }
        if let Some(s) = self.static_decl(name) {
            return Some(SymbolRef::Static(s));
        }
        if let Some(a) = self.action(name) {
            return Some(SymbolRef::Action(a));
        }
        self.fluent(name).map(SymbolRef::Fluent)
    }

    /// Objects of an object sort, as terms.
    pub fn domain(&self, sort: &Sort) -> Option<Vec<Term>> {
        match sort {
            Sort::Object(name) => self
                .sort(name)
                .map(|d| d.objects.iter().map(|o| Term::Obj(o.clone())).collect()),
            _ => None,
        }
    }

    /// All tuples over the given object sorts; `None` if a sort is not an
    /// object sort.
    pub fn groundings(&self, sorts: &[Sort]) -> Option<Vec<Vec<Term>>> {
        let mut out = vec![vec![]];
        for s in sorts {
            let dom = self.domain(s)?;
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    dom.iter().map(move |o| {
                        let mut p = prefix.clone();
                        p.push(o.clone());
                        p
                    })
                })
                .collect();
        }
        Some(out)
    }

    pub fn temporal_fluents(&self) -> impl Iterator<Item = &FluentDecl> {
        self.fluents
            .iter()
            .filter(|f| f.kind == FluentKind::Temporal)
    }

    /// Name of the companion `f_init` fluent of a temporal fluent.
    pub fn init_of(&self, temporal: &str) -> Option<&FluentDecl> {
        self.fluents
            .iter()
            .find(|f| matches!(&f.kind, FluentKind::Init { of } if of == temporal))
    }

    pub fn poss_for(&self, action: &str) -> Option<&PossAxiom> {
        self.poss.iter().find(|p| p.action == action)
    }

    pub fn ssa_for(&self, fluent: &str) -> Option<&Ssa> {
        self.ssas.iter().find(|p| p.fluent == fluent)
    }

    pub fn init_ssa_for(&self, fluent: &str) -> Option<&InitSsaDecl> {
        self.init_ssas.iter().find(|p| p.fluent == fluent)
    }

    pub fn tcas_for<'a>(&'a self, fluent: &'a str) -> impl Iterator<Item = &'a Tca> + 'a {
        self.tcas.iter().filter(move |t| t.fluent == fluent)
    }

    fn definition(&self, name: &Symbol) -> Option<&Definition> {
        self.static_decl(name).and_then(|d| d.def.as_ref())
    }

    pub fn has_definitions(&self) -> bool {
        self.statics.iter().any(|d| d.def.is_some())
    }

    /// Replaces applications of defined statics by their bodies.
    pub fn expand_term(&self, t: &Term) -> Term {
        let t = t.map_children(|c| self.expand_term(c));
        match &t {
            Term::Static(name, args) => match self.definition(name) {
                Some(Definition {
                    params,
                    body: DefBody::Term(body),
                }) => {
                    let s: Subst = params.iter().cloned().zip(args.iter().cloned()).collect();
                    self.expand_term(&subst_term(body, &s))
                }
                _ => t,
            },
            _ => t,
        }
    }

    pub fn expand_formula(&self, f: &Formula) -> Formula {
        if !self.has_definitions() {
            return f.clone();
        }
        if f.is_atom() {
            let f = f.map_atom_terms(|t| self.expand_term(t));
            if let Formula::Pred(name, args) = &f {
                if let Some(Definition {
                    params,
                    body: DefBody::Formula(body),
                }) = self.definition(name)
                {
                    let s: Subst = params.iter().cloned().zip(args.iter().cloned()).collect();
                    return self.expand_formula(&subst_formula(body, &s));
                }
            }
            return f;
        }
        f.map_children(|c| self.expand_formula(c))
    }

    /// Function symbols whose values are objects, for arithmetic reasoning.
    pub fn object_valued(&self) -> std::collections::BTreeSet<Symbol> {
        let statics = self
            .statics
            .iter()
            .filter(|s| matches!(&s.kind, StaticKind::Fun(Sort::Object(_))))
            .map(|s| s.name.clone());
        let fluents = self
            .fluents
            .iter()
            .filter(|f| matches!(&f.kind, FluentKind::Fun(Sort::Object(_))))
            .map(|f| f.name.clone());
        statics.chain(fluents).collect()
    }
}

pub fn init_name(temporal: &str) -> String {
    format!("{temporal}_init")
}
