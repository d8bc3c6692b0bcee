//! Encoding of an automaton as a temporal action theory: one action
//! `trans(q1, q2, y.., t)`, the discrete state `Q(s)`, and one temporal
//! fluent `X_c` per coordinate whose evolution axiom has a branch per state.

use itertools::Itertools;

use super::HybridAutomaton;
use crate::dsl::theory::{init_name, Diagnostic};
use crate::logic::{format_rat, Formula, Rat, Term};
use crate::sea::{compile_source, Compiled};

pub fn coordinate_fluent(c: &str) -> String {
    format!("X_{c}")
}

fn flow_name(q: &str, c: &str) -> String {
    format!("flow_{q}_{c}")
}

fn disjunction(parts: Vec<String>) -> String {
    if parts.is_empty() {
        "false".to_string()
    } else {
        parts.into_iter().map(|p| format!("({p})")).join("\n    | ")
    }
}

/// The `.tbat` source of the encoding.
pub fn ha_to_tbat(h: &HybridAutomaton) -> String {
    let cs: Vec<String> = h.vars.iter().map(|v| v.name.to_string()).collect();
    let reals = |prefix: &str| cs.iter().map(|c| format!("{prefix}{c}: real")).join(", ");
    let plain = |prefix: &str| cs.iter().map(|c| format!("{prefix}{c}")).join(", ");
    let ys = plain("y_");
    let mut out = String::new();
    if !h.name.is_empty() {
        out += &format!("// Encoding of hybrid automaton `{}`.\n\n", h.name);
    }
    out += &format!(
        "sorts {{\n  state = {{ {} }};\n}}\n\n",
        h.states.iter().join(", ")
    );

    out += "statics {\n  pred Edge(state, state);\n";
    for (q, flow) in &h.flows {
        for (c, e) in cs.iter().zip(flow) {
            let params = if cs.is_empty() {
                "t: real".to_string()
            } else {
                format!("{}, t: real", reals(""))
            };
            out += &format!("  def fun {}({params}): real := {e};\n", flow_name(q, c));
        }
    }
    let sep = if cs.is_empty() { "" } else { ", " };
    let inv: Vec<String> = h
        .states
        .iter()
        .map(|q| format!("q = {q} & ({})", h.invariant(q)))
        .collect();
    out += &format!(
        "  def pred Inv(q: state{sep}{}) :=\n    {};\n",
        reals(""),
        disjunction(inv)
    );
    let resets: Vec<String> = h
        .edges
        .iter()
        .map(|e| {
            let assigns = cs
                .iter()
                .zip(&e.reset)
                .map(|(c, r)| format!(" & y_{c} = {r}"));
            format!(
                "q1 = {} & q2 = {} & ({}){}",
                e.from,
                e.to,
                e.guard,
                assigns.collect::<String>()
            )
        })
        .collect();
    out += &format!(
        "  def pred Reset(q1: state, q2: state{sep}{}{sep}{}) :=\n    {};\n",
        reals(""),
        reals("y_"),
        disjunction(resets)
    );
    let init: Vec<String> = h
        .init
        .iter()
        .map(|(q, f)| format!("q = {q} & ({f})"))
        .collect();
    out += &format!(
        "  def pred Init(q: state{sep}{}) :=\n    {};\n}}\n\n",
        reals(""),
        disjunction(init)
    );

    out += &format!(
        "actions {{\n  trans(state, state{});\n}}\n\n",
        ", real".repeat(cs.len())
    );
    out += "fluents {\n  fun Q: state;\n";
    for c in &cs {
        out += &format!("  temporal {};\n", coordinate_fluent(c));
    }
    out += "}\n\n";

    let xs_at = cs
        .iter()
        .map(|c| format!("{}(t, s)", coordinate_fluent(c)))
        .join(", ");
    out += &format!(
        "poss {{\n  Poss(trans(q1, q2{sep}{ys}, t), s) <-> Q(s) = q1 & Edge(q1, q2)\n    & Reset(q1, q2{sep}{xs_at}{sep}{ys}) & Inv(q2{sep}{ys});\n}}\n\n"
    );
    let exists_ys = if cs.is_empty() {
        String::new()
    } else {
        format!("{}, ", reals("y_"))
    };
    out += &format!(
        "ssa {{\n  Q(do(a, s)) = q <-> (exists q1: state, {exists_ys}t: real. a = trans(q1, q{sep}{ys}, t))\n    | Q(s) = q & !(exists q2: state, {exists_ys}t: real. a = trans(q, q2{sep}{ys}, t));\n}}\n\n"
    );
    if !cs.is_empty() {
        out += "init-ssa {\n";
        for c in &cs {
            out += &format!(
                "  {}(do(a, s)) {{ trans(q1, q2, {ys}, t) => y_{c}; }}\n",
                init_name(&coordinate_fluent(c))
            );
        }
        out += "}\n\n";
        let inits = cs
            .iter()
            .map(|c| format!("{}(s)", init_name(&coordinate_fluent(c))))
            .join(", ");
        out += "tca {\n";
        for (q, _) in &h.flows {
            for c in &cs {
                out += &format!(
                    "  {}(t, s) = y when Q(s) = {q} then y = {}({inits}, t - start(s));\n",
                    coordinate_fluent(c),
                    flow_name(q, c)
                );
            }
        }
        out += "}\n\n";
    }

    out += "init {\n  start = 0;\n";
    for e in h.edges.iter().map(|e| (&e.from, &e.to)).unique() {
        out += &format!("  Edge({}, {});\n", e.0, e.1);
    }
    let (q0, x0) = &h.start;
    out += &format!("  Q = {q0};\n");
    for (c, v) in cs.iter().zip(x0) {
        out += &format!(
            "  {} = {};\n",
            init_name(&coordinate_fluent(c)),
            format_rat(v)
        );
    }
    out += "}\n";
    out
}

/// Translates and compiles an automaton.
pub fn translate(h: &HybridAutomaton) -> Result<Compiled, Vec<Diagnostic>> {
    compile_source(&ha_to_tbat(h))
}

/// `trans(from, to, y.., t)`.
pub fn trans_action(from: &str, to: &str, y: &[Rat], t: &Rat) -> Term {
    let mut args = vec![Term::obj(from), Term::obj(to)];
    args.extend(y.iter().cloned().map(Term::Num));
    Term::action("trans", args, Term::Num(t.clone()))
}

/// `Inv(q, x..)` as a formula of the encoding.
pub fn inv_atom(q: Term, x: Vec<Term>) -> Formula {
    let mut args = vec![q];
    args.extend(x);
    Formula::pred("Inv", args)
}
