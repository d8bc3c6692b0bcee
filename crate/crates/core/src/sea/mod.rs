//! Compilation of temporal change axioms into state evolution axioms, and
//! of effect cases into init successor state axioms.

pub mod consistency;
pub mod derive;
pub mod disjoin;

use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;

use crate::dsl::elaborate::declared_names;
use crate::dsl::theory::*;
use crate::eval::{InitialModel, Oracle};
use crate::logic::subst::fresh_name;
use crate::logic::{subst_formula, Formula, Sort, Subst, Symbol, Term, Var};

pub use consistency::check_consistency;
pub use derive::{derive_init_ssa, derive_sea};
pub use disjoin::{build_pnf, disjoin_contexts};

/// One `context => law` pair of an evolution axiom.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub context: Formula,
    pub law: Formula,
}

/// `f(params, time, sit) = value <-> ⋁ (context ∧ law) ∨ frame`, where the
/// frame branch is `value = f_init(params, sit) ∧ ¬⋁ context`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sea {
    pub fluent: Symbol,
    pub init: Symbol,
    pub params: Vec<Var>,
    pub time: Var,
    pub value: Var,
    pub sit: Var,
    pub branches: Vec<Branch>,
    pub frame: bool,
}

/// Variables shared by all axioms of one temporal fluent.
#[derive(Clone, Debug, PartialEq)]
pub struct Head {
    pub fluent: Symbol,
    pub params: Vec<Var>,
    pub time: Var,
    pub value: Var,
    pub sit: Var,
}

impl Head {
    /// Names taken from the first change axiom, or invented when there is
    /// none.
    pub fn for_fluent(th: &Theory, decl: &FluentDecl) -> Head {
        if let Some(t) = th.tcas_for(&decl.name).next() {
            return Head {
                fluent: decl.name.clone(),
                params: t.params.clone(),
                time: t.time.clone(),
                value: t.value.clone(),
                sit: t.sit.clone(),
            };
        }
        let mut avoid = declared_names(th);
        let mut fresh = |base: &str, sort: Sort| {
            let n = fresh_name(base, &avoid);
            avoid.insert(n.clone());
            Var::new(&n, sort)
        };
        let params = decl
            .params
            .iter()
            .enumerate()
            .map(|(i, s)| fresh(&format!("x{}", i + 1), s.clone()))
            .collect();
        Head {
            fluent: decl.name.clone(),
            params,
            time: fresh("t", Sort::Real),
            value: fresh("y", Sort::Real),
            sit: fresh("s", Sort::Situation),
        }
    }

    /// A change axiom's context and law, renamed to these variables.
    pub fn adopt(&self, tca: &Tca) -> Branch {
        let mut s = Subst::new();
        for (from, to) in tca.params.iter().zip(&self.params) {
            s.insert(from.clone(), Term::var(to));
        }
        s.insert(tca.time.clone(), Term::var(&self.time));
        s.insert(tca.value.clone(), Term::var(&self.value));
        s.insert(tca.sit.clone(), Term::var(&self.sit));
        Branch {
            context: subst_formula(&tca.context, &s),
            law: subst_formula(&tca.law, &s),
        }
    }

    pub fn param_terms(&self) -> Vec<Term> {
        self.params.iter().map(Term::var).collect()
    }

    pub fn grounding(&self, args: &[Term]) -> Subst {
        self.params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect()
    }
}

impl Sea {
    pub fn head(&self) -> Head {
        Head {
            fluent: self.fluent.clone(),
            params: self.params.clone(),
            time: self.time.clone(),
            value: self.value.clone(),
            sit: self.sit.clone(),
        }
    }

    pub fn init_term(&self) -> Term {
        Term::Fluent(
            self.init.clone(),
            self.params.iter().map(Term::var).collect(),
            Box::new(Term::var(&self.sit)),
        )
    }

    /// `⋁ context`.
    pub fn psi(&self) -> Formula {
        Formula::or(self.branches.iter().map(|b| b.context.clone()).collect())
    }

    /// `⋁ (context ∧ law)`.
    pub fn pnf(&self) -> Formula {
        Formula::or(
            self.branches
                .iter()
                .map(|b| Formula::and(vec![b.context.clone(), b.law.clone()]))
                .collect(),
        )
    }

    pub fn frame_formula(&self) -> Formula {
        Formula::and(vec![
            Formula::Eq(Term::var(&self.value), self.init_term()),
            Formula::not(self.psi()),
        ])
    }

    /// The right-hand side, free in the head variables.
    pub fn rhs(&self) -> Formula {
        let mut ds: Vec<Formula> = self
            .branches
            .iter()
            .map(|b| Formula::and(vec![b.context.clone(), b.law.clone()]))
            .collect();
        if self.frame {
            ds.push(self.frame_formula());
        }
        Formula::or(ds)
    }

    /// Number of disjuncts, counting the frame branch.
    pub fn disjuncts(&self) -> usize {
        self.branches.len() + usize::from(self.frame)
    }

    fn binding(&self, args: &[Term], time: &Term, value: &Term, sit: &Term) -> Subst {
        let mut s: Subst = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect();
        s.insert(self.time.clone(), time.clone());
        s.insert(self.value.clone(), value.clone());
        s.insert(self.sit.clone(), sit.clone());
        s
    }

    /// `rhs` with the head variables replaced.
    pub fn instantiate(&self, args: &[Term], time: &Term, value: &Term, sit: &Term) -> Formula {
        subst_formula(&self.rhs(), &self.binding(args, time, value, sit))
    }

    /// Context `i` (or the frame condition for `i == branches.len()`) at the
    /// given arguments and situation.
    pub fn context_at(&self, i: usize, args: &[Term], sit: &Term) -> Formula {
        let c = match self.branches.get(i) {
            Some(b) => b.context.clone(),
            None => Formula::not(self.psi()),
        };
        let mut s: Subst = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect();
        s.insert(self.sit.clone(), sit.clone());
        subst_formula(&c, &s)
    }

    /// Law `i` (or the frame law) with the head variables replaced.
    pub fn law_at(
        &self,
        i: usize,
        args: &[Term],
        time: &Term,
        value: &Term,
        sit: &Term,
    ) -> Formula {
        let l = match self.branches.get(i) {
            Some(b) => b.law.clone(),
            None => Formula::Eq(Term::var(&self.value), self.init_term()),
        };
        subst_formula(&l, &self.binding(args, time, value, sit))
    }
}

impl fmt::Display for Sea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args = self
            .params
            .iter()
            .map(|p| p.name.to_string())
            .chain([self.time.name.to_string(), self.sit.name.to_string()]);
        writeln!(
            f,
            "{}({}) = {} <->",
            self.fluent,
            args.format(", "),
            self.value.name
        )?;
        let mut lines: Vec<String> = self
            .branches
            .iter()
            .map(|b| format!("({}) & ({})", b.context, b.law))
            .collect();
        if self.frame {
            lines.push(format!(
                "!({}) & {} = {}",
                self.psi(),
                self.value.name,
                self.init_term()
            ));
        }
        if lines.is_empty() {
            return write!(f, "    false;");
        }
        write!(f, "    {};", lines.join("\n  | "))
    }
}

/// `f_init(params, do(a, s)) = y <-> ⋁ effect cases ∨ default`.
#[derive(Clone, Debug, PartialEq)]
pub struct InitSsa {
    pub fluent: Symbol,
    pub of: Symbol,
    pub params: Vec<Var>,
    pub action: Var,
    pub sit: Var,
    pub value: Var,
    pub cases: Vec<EffectCase>,
}

impl InitSsa {
    /// `∃fresh. a = A(args, time) ∧ guard`.
    pub fn case_condition(&self, c: &EffectCase) -> Formula {
        Formula::exists_many(
            c.fresh.iter().cloned(),
            Formula::and(vec![
                Formula::Eq(Term::var(&self.action), c.action_term()),
                c.guard.clone(),
            ]),
        )
    }

    fn case_formula(&self, c: &EffectCase) -> Formula {
        Formula::exists_many(
            c.fresh.iter().cloned(),
            Formula::and(vec![
                Formula::Eq(Term::var(&self.action), c.action_term()),
                c.guard.clone(),
                Formula::Eq(Term::var(&self.value), c.value.clone()),
            ]),
        )
    }

    /// `y = f(params, time(a), s)` when no case applies.
    pub fn default_formula(&self) -> Formula {
        let time = Term::Time(Box::new(Term::var(&self.action)));
        let cont = Term::Temporal(
            self.of.clone(),
            self.params.iter().map(Term::var).collect(),
            Box::new(time),
            Box::new(Term::var(&self.sit)),
        );
        let none = self
            .cases
            .iter()
            .map(|c| Formula::not(self.case_condition(c)));
        Formula::and(
            none.chain([Formula::Eq(Term::var(&self.value), cont)])
                .collect(),
        )
    }

    /// The right-hand side Ω, free in params, action, situation and value.
    pub fn omega(&self) -> Formula {
        let cases = self.cases.iter().map(|c| self.case_formula(c));
        Formula::or(cases.chain([self.default_formula()]).collect())
    }

    pub fn instantiate(&self, args: &[Term], action: &Term, value: &Term, sit: &Term) -> Formula {
        let mut s: Subst = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().cloned())
            .collect();
        s.insert(self.action.clone(), action.clone());
        s.insert(self.value.clone(), value.clone());
        s.insert(self.sit.clone(), sit.clone());
        subst_formula(&self.omega(), &s)
    }
}

impl fmt::Display for InitSsa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args = self
            .params
            .iter()
            .map(|p| p.name.to_string())
            .chain([format!("do({}, {})", self.action.name, self.sit.name)]);
        write!(
            f,
            "{}({}) = {} <->\n    ",
            self.fluent,
            args.format(", "),
            self.value.name
        )?;
        let parts: Vec<String> = self
            .cases
            .iter()
            .map(|c| format!("({})", self.case_formula(c)))
            .chain([format!("({})", self.default_formula())])
            .collect();
        write!(f, "{};", parts.join("\n  | "))
    }
}

/// A validated theory together with its compiled axioms.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub theory: Theory,
    pub model: InitialModel,
    pub seas: Vec<Sea>,
    pub init_ssas: Vec<InitSsa>,
    pub warnings: Vec<Diagnostic>,
}

impl Compiled {
    pub fn sea(&self, fluent: &str) -> Option<&Sea> {
        self.seas.iter().find(|s| s.fluent == fluent)
    }

    pub fn init_ssa(&self, init: &str) -> Option<&InitSsa> {
        self.init_ssas.iter().find(|s| s.fluent == init)
    }

    pub fn oracle(&self) -> Oracle<'_> {
        Oracle::new(&self.theory, &self.model)
    }

    /// The compiled axioms in the concrete syntax.
    pub fn render(&self) -> String {
        let mut out = String::from("sea {\n");
        for s in &self.seas {
            out.push_str(&indent(&s.to_string()));
        }
        out.push_str("}\n\ninit-ssa {\n");
        for s in &self.init_ssas {
            out.push_str(&indent(&s.to_string()));
        }
        out.push_str("}\n");
        out
    }
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("  {l}\n")).collect()
}

/// Compiles a theory that passed validation: contexts are made disjoint,
/// evolution and init axioms derived, and consistency checked. Errors in
/// any step are returned together with the warnings collected so far.
pub fn compile(th: &Theory) -> Result<Compiled, Vec<Diagnostic>> {
    let (model, diags) = InitialModel::build(th);
    if has_errors(&diags) {
        return Err(diags);
    }
    let oracle = Oracle::new(th, &model);
    let decls: Vec<&FluentDecl> = th.temporal_fluents().collect();
    let per_fluent: Vec<(Sea, Option<InitSsa>, Vec<Diagnostic>)> = decls
        .par_iter()
        .map(|decl| {
            let head = Head::for_fluent(th, decl);
            let tcas: Vec<Branch> = th.tcas_for(&decl.name).map(|t| head.adopt(t)).collect();
            let (branches, mut diags) = disjoin_contexts(&head, tcas, &oracle);
            let sea = derive_sea(&head, &init_name(&decl.name), branches, &oracle);
            let init = match th.init_ssa_for(&init_name(&decl.name)) {
                Some(d) => {
                    let (i, d2) = derive_init_ssa(d, th, &oracle);
                    diags.extend(d2);
                    Some(i)
                }
                None => None,
            };
            (sea, init, diags)
        })
        .collect();
    let mut seas = Vec::new();
    let mut init_ssas = Vec::new();
    let mut all = diags;
    for (s, i, d) in per_fluent {
        seas.push(s);
        init_ssas.extend(i);
        all.extend(d);
    }
    if has_errors(&all) {
        return Err(all);
    }
    all.extend(check_consistency(th, &oracle, &seas));
    if has_errors(&all) {
        return Err(all);
    }
    Ok(Compiled {
        theory: th.clone(),
        model,
        seas,
        init_ssas,
        warnings: all,
    })
}

/// Parses, validates and compiles.
pub fn compile_source(src: &str) -> Result<Compiled, Vec<Diagnostic>> {
    let (th, mut warnings) = crate::dsl::parse_theory(src)?;
    let mut c = compile(&th).map_err(|mut d| {
        let mut all = warnings.clone();
        all.append(&mut d);
        all
    })?;
    warnings.append(&mut c.warnings);
    c.warnings = warnings;
    Ok(c)
}

/// Object-sort groundings of the head parameters, or the generic tuple of
/// parameter variables when some sort is not finite.
pub fn groundings(th: &Theory, head: &Head) -> Vec<Vec<Term>> {
    let sorts: Vec<Sort> = head.params.iter().map(|p| p.sort.clone()).collect();
    th.groundings(&sorts)
        .unwrap_or_else(|| vec![head.param_terms()])
}

/// ` for x = a, ..` naming a grounding in messages; empty without
/// parameters.
pub fn describe_grounding(head: &Head, args: &[Term]) -> String {
    if head.params.is_empty() {
        return String::new();
    }
    format!(
        " for {}",
        head.params
            .iter()
            .zip(args)
            .map(|(p, a)| format!("{} = {a}", p.name))
            .join(", ")
    )
}

#[cfg(test)]
mod tests;
