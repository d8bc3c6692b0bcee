//! The complete initial model built from a theory's ground facts.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::dsl::theory::*;
use crate::logic::simplify::simplify_term_with;
use crate::logic::{simplify_with, Formula, GroundFacts, Rat, SimplifyContext, Sort, Symbol, Term};

/// Closed-world reading of the initial section: every relational fluent and
/// table predicate is false unless stated, every function has exactly one
/// value per tuple.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InitialModel {
    pub start: Rat,
    domains: BTreeMap<Symbol, Vec<Term>>,
    preds: BTreeSet<(Symbol, Vec<Term>)>,
    funs: BTreeMap<(Symbol, Vec<Term>), Term>,
    /// Predicates and functions with a total extension in this model.
    known: BTreeSet<Symbol>,
    /// Defined statics, kept as a declarations-only theory for expansion.
    defs: Theory,
    pub object_valued: BTreeSet<Symbol>,
}

fn render(name: &str, args: &[Term]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.iter().join(", "))
    }
}

fn matches(pattern: &[FactArg], tuple: &[Term]) -> bool {
    pattern.iter().zip(tuple).all(|(p, t)| match p {
        FactArg::Any => true,
        FactArg::Term(x) => x == t,
    })
}

fn is_explicit(f: &Fact) -> bool {
    f.args.iter().all(|a| matches!(a, FactArg::Term(_)))
}

/// Where a symbol's initial extension comes from.
#[derive(Clone, Copy)]
enum Extension<'a> {
    Pred(&'a [Sort]),
    Fun(&'a [Sort], bool),
}

impl InitialModel {
    /// Builds the model, reporting missing, conflicting or incomplete
    /// facts. The model is only meaningful when no error is reported.
    pub fn build(th: &Theory) -> (InitialModel, Vec<Diagnostic>) {
        let mut diags = Vec::new();
        let mut m = InitialModel::default();
        match &th.init.start {
            Some(r) => m.start = r.clone(),
            None => diags.push(Diagnostic::error(
                "missing-start",
                "the initial section must give `start = r` (the starting time of S0)",
                None,
            )),
        }
        for s in &th.sorts {
            m.domains.insert(
                s.name.clone(),
                s.objects.iter().map(|o| Term::Obj(o.clone())).collect(),
            );
        }
        m.defs = Theory {
            statics: th
                .statics
                .iter()
                .filter(|d| d.def.is_some())
                .cloned()
                .collect(),
            ..Theory::default()
        };
        m.object_valued = th.object_valued();

        let mut symbols: Vec<(&Symbol, Extension)> = Vec::new();
        for d in th.statics.iter().filter(|d| d.def.is_none()) {
            symbols.push((
                &d.name,
                match d.kind {
                    StaticKind::Pred => Extension::Pred(&d.params),
                    StaticKind::Fun(_) => Extension::Fun(&d.params, false),
                },
            ));
        }
        for f in &th.fluents {
            match f.kind {
                FluentKind::Rel => symbols.push((&f.name, Extension::Pred(&f.params))),
                FluentKind::Fun(_) | FluentKind::Init { .. } => {
                    symbols.push((&f.name, Extension::Fun(&f.params, true)))
                }
                FluentKind::Temporal => {}
            }
        }

        for (name, ext) in symbols {
            let facts: Vec<&Fact> = th.init.facts.iter().filter(|f| &f.symbol == name).collect();
            let (sorts, is_pred) = match ext {
                Extension::Pred(s) => (s, true),
                Extension::Fun(s, _) => (s, false),
            };
            let Some(tuples) = th.groundings(sorts) else {
                continue;
            };
            m.known.insert(name.clone());
            // Explicit facts first; wildcards only fill what is left.
            let mut assigned: BTreeMap<Vec<Term>, (&Fact, FactValue)> = BTreeMap::new();
            for explicit in [true, false] {
                let mut this_round: BTreeMap<Vec<Term>, (&Fact, FactValue)> = BTreeMap::new();
                for f in facts.iter().filter(|f| is_explicit(f) == explicit) {
                    for t in tuples.iter().filter(|t| matches(&f.args, t)) {
                        if !explicit && assigned.contains_key(t) {
                            continue;
                        }
                        if let Some((prev, v)) = this_round.get(t) {
                            if *v != f.value {
                                diags.push(conflict(name, t, prev, f, &ext));
                            }
                            continue;
                        }
                        this_round.insert(t.clone(), (f, f.value.clone()));
                    }
                }
                assigned.extend(this_round);
            }
            if is_pred {
                for (t, (_, v)) in assigned {
                    if v == FactValue::Holds(true) {
                        m.preds.insert((name.clone(), t));
                    }
                }
            } else {
                if let Some(missing) = tuples.iter().find(|t| !assigned.contains_key(*t)) {
                    let count = tuples.iter().filter(|t| !assigned.contains_key(*t)).count();
                    diags.push(Diagnostic::error(
                        "incomplete-init",
                        format!(
                            "no initial value for {} ({count} tuple(s) missing); use `_` to give a default",
                            render(name, missing)
                        ),
                        None,
                    ));
                }
                for (t, (_, v)) in assigned {
                    if let FactValue::Is(v) = v {
                        m.funs.insert((name.clone(), t), v);
                    }
                }
            }
        }
        (m, diags)
    }

    pub fn domain_of(&self, sort: &Symbol) -> &[Term] {
        self.domains.get(sort).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Value of a function at S0 (static or fluent), if the model has one.
    pub fn value(&self, name: &Symbol, args: &[Term]) -> Option<&Term> {
        self.funs.get(&(name.clone(), args.to_vec()))
    }

    pub fn holds(&self, name: &Symbol, args: &[Term]) -> bool {
        self.preds.contains(&(name.clone(), args.to_vec()))
    }

    pub fn function_entries(&self) -> impl Iterator<Item = (&Symbol, &[Term], &Term)> {
        self.funs.iter().map(|((n, a), v)| (n, a.as_slice(), v))
    }

    pub fn true_atoms(&self) -> impl Iterator<Item = (&Symbol, &[Term])> {
        self.preds.iter().map(|(n, a)| (n, a.as_slice()))
    }

    /// Overrides the value of a function entry.
    pub fn set_value(&mut self, name: &Symbol, args: Vec<Term>, v: Term) {
        self.known.insert(name.clone());
        self.funs.insert((name.clone(), args), v);
    }

    pub fn set_holds(&mut self, name: &Symbol, args: Vec<Term>, v: bool) {
        self.known.insert(name.clone());
        if v {
            self.preds.insert((name.clone(), args));
        } else {
            self.preds.remove(&(name.clone(), args));
        }
    }

    /// Expands defined statics in `f`.
    pub fn expand(&self, f: &Formula) -> Formula {
        self.defs.expand_formula(f)
    }

    pub fn expand_term(&self, t: &Term) -> Term {
        self.defs.expand_term(t)
    }

    fn def_term(&self, name: &Symbol, args: &[Term]) -> Option<Term> {
        self.defs.static_decl(name)?.def.as_ref()?;
        let t = self
            .defs
            .expand_term(&Term::Static(name.clone(), args.to_vec()));
        let t = simplify_term_with(&t, &SimplifyContext::full(self));
        matches!(t, Term::Num(_) | Term::Obj(_)).then_some(t)
    }

    fn def_holds(&self, name: &Symbol, args: &[Term]) -> Option<bool> {
        self.defs.static_decl(name)?.def.as_ref()?;
        let f = self
            .defs
            .expand_formula(&Formula::Pred(name.clone(), args.to_vec()));
        match simplify_with(&f, &SimplifyContext::full(self)) {
            Formula::True => Some(true),
            Formula::False => Some(false),
            _ => None,
        }
    }
}

fn conflict(name: &Symbol, tuple: &[Term], a: &Fact, b: &Fact, ext: &Extension) -> Diagnostic {
    let atom = render(name, tuple);
    match ext {
        Extension::Pred(_) => Diagnostic::error(
            "contradiction",
            format!("contradictory initial facts: {atom} is asserted both true and false (lines {} and {})", a.span, b.span),
            Some(b.span),
        ),
        Extension::Fun(_, fluent) => {
            let show = |f: &Fact| match &f.value {
                FactValue::Is(v) => v.to_string(),
                FactValue::Holds(h) => h.to_string(),
            };
            let what = if *fluent { "functional fluent double-valued at S0" } else { "static function double-valued" };
            Diagnostic::error(
                "double-valued",
                format!("{what}: {atom} = {} and {atom} = {}", show(a), show(b)),
                Some(b.span),
            )
        }
    }
}

impl GroundFacts for InitialModel {
    fn start_s0(&self) -> Option<Rat> {
        Some(self.start.clone())
    }

    fn static_value(&self, name: &Symbol, args: &[Term]) -> Option<Term> {
        self.value(name, args)
            .cloned()
            .or_else(|| self.def_term(name, args))
    }

    fn static_holds(&self, name: &Symbol, args: &[Term]) -> Option<bool> {
        if self.known.contains(name) {
            return Some(self.holds(name, args));
        }
        self.def_holds(name, args)
    }

    fn rel_at_s0(&self, name: &Symbol, args: &[Term]) -> Option<bool> {
        self.known.contains(name).then(|| self.holds(name, args))
    }

    fn fluent_at_s0(&self, name: &Symbol, args: &[Term]) -> Option<Term> {
        self.value(name, args).cloned()
    }

    fn domain(&self, sort: &Sort) -> Option<Vec<Term>> {
        match sort {
            Sort::Object(n) => self.domains.get(n).cloned(),
            _ => None,
        }
    }
}
