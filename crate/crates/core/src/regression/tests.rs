use super::*;
use crate::arith::linear::LinExpr;
use crate::dsl::{parse_narrative, parse_query};
use crate::eval::{evaluate, evaluate_term};
use crate::logic::{is_uniform_in, rat, ratio, CmpOp};
use crate::sea::compile_source;

const TRAFFIC: &str = include_str!("../../data/traffic.tbat");
const NARRATIVE: &str = "switch(I)@1; switch(I)@2";

fn traffic() -> Compiled {
    compile_source(TRAFFIC).unwrap()
}

fn narrative(c: &Compiled, src: &str) -> Term {
    Term::do_seq(parse_narrative(&c.theory, src).unwrap())
}

fn query(c: &Compiled, src: &str, sit: Term) -> Formula {
    parse_query(&c.theory, src, sit, Vec::new()).unwrap()
}

fn que_init_s0() -> Term {
    Term::fluent("que_init", vec![Term::obj("I"), Term::obj("in1")], Term::S0)
}

#[test]
fn golden_query_regresses_to_the_initial_queue() {
    let c = traffic();
    let w = query(&c, "que(I, in1, 3) < 95", narrative(&c, NARRATIVE));
    let r = Regressor::new(&c).regress(&w).unwrap();
    assert!(is_uniform_in(&r.formula, &Term::S0));
    let Formula::Cmp(CmpOp::Lt, lhs, rhs) = &r.formula else {
        panic!("{}", r.formula)
    };
    let lin = LinExpr::from_term(lhs).unwrap();
    assert_eq!(lin.coeff(&que_init_s0()), rat(1));
    assert_eq!(lin.constant, rat(-30));
    assert_eq!(rhs.as_num(), Some(&rat(95)));
    assert_eq!(evaluate_term(lhs, &c.model).unwrap(), rat(70));
    assert!(evaluate(&r.formula, &c.model).unwrap());
}

#[test]
fn golden_trace_follows_the_narrative_backwards() {
    let c = traffic();
    let w = query(&c, "que(I, in1, 3) < 95", narrative(&c, NARRATIVE));
    let r = Regressor::new(&c).regress(&w).unwrap();
    let rules: Vec<(Rule, usize)> = r
        .trace
        .iter()
        .filter(|s| s.rule != Rule::Simplify && s.rule != Rule::StartOfDo)
        .map(|s| (s.rule, s.depth))
        .collect();
    assert_eq!(
        rules,
        [
            (Rule::TemporalSea, 2),
            (Rule::InitSsa, 2),
            (Rule::TemporalSea, 1),
            (Rule::InitSsa, 1),
            (Rule::TemporalSea, 0),
        ]
    );
    let rendered: Vec<String> = r
        .trace
        .iter()
        .filter(|s| s.rule == Rule::Simplify)
        .map(|s| s.after.to_string())
        .collect();
    assert_eq!(
        rendered,
        [
            "que_init(I, in1, do(switch(I, 2), do(switch(I, 1), S0))) - 20 < 95",
            "que(I, in1, 2, do(switch(I, 1), S0)) - 20 < 95",
            "que_init(I, in1, do(switch(I, 1), S0)) - 10 - 20 < 95",
            "que(I, in1, 1, S0) - 10 - 20 < 95",
            "que_init(I, in1, S0) - 10 - 20 < 95",
        ]
    );
    let notes: Vec<_> = r.trace.iter().filter_map(|s| s.note.as_deref()).collect();
    assert_eq!(
        notes,
        [
            "branch 3 selected",
            "branch 2 selected",
            "branch 1 selected"
        ]
    );
}

#[test]
fn symbolic_mode_agrees_with_resolved_mode() {
    let c = traffic();
    for (q, n) in [
        ("que(I, in1, 3) < 95", NARRATIVE),
        ("que(I, in2, 5/2) >= 40", NARRATIVE),
        (
            "que(I, in3, 4) = 80",
            "switch(I)@1; switch(I)@2; switch(I)@3",
        ),
        ("que(I, in4, 7) <= 0", "switch(I)@2"),
    ] {
        let w = query(&c, q, narrative(&c, n));
        let resolved = regress(&w, &c).unwrap();
        let symbolic = Regressor::new(&c)
            .mode(Mode::Symbolic)
            .regress(&w)
            .unwrap()
            .formula;
        assert!(is_uniform_in(&symbolic, &Term::S0));
        assert_eq!(
            evaluate(&resolved, &c.model).unwrap(),
            evaluate(&symbolic, &c.model).unwrap(),
            "{q}"
        );
    }
}

#[test]
fn partial_regression_stops_at_the_prefix() {
    let c = traffic();
    let sit = narrative(&c, NARRATIVE);
    let w = query(&c, "que(I, in1, 3) < 95", sit.clone());
    let stop = narrative(&c, "switch(I)@1");
    let p = partial_regress(&w, &stop, &c).unwrap();
    assert!(is_uniform_in(&p, &stop), "{p}");
    let init = Term::fluent(
        "que_init",
        vec![Term::obj("I"), Term::obj("in1")],
        stop.clone(),
    );
    assert!(p.any_term(&mut |t| *t == init), "{p}");
    assert_eq!(
        evaluate(&regress(&p, &c).unwrap(), &c.model),
        evaluate(&regress(&w, &c).unwrap(), &c.model)
    );

    assert_eq!(
        partial_regress(&w, &Term::S0, &c).unwrap(),
        regress(&w, &c).unwrap()
    );
    let own = partial_regress(&w, &sit, &c).unwrap();
    assert!(is_uniform_in(&own, &sit));
    assert!(matches!(
        partial_regress(&w, &narrative(&c, "switch(I)@2"), &c),
        Err(RegressionError::NotPrefix { .. })
    ));
}

#[test]
fn precondition_of_empty_is_regressed() {
    let c = traffic();
    let w = query(&c, "Poss(empty(I, in1, 2), S0)", Term::S0);
    let r = Regressor::new(&c).regress(&w).unwrap();
    assert_eq!(r.trace[0].rule, Rule::Poss);
    assert!(is_uniform_in(&r.formula, &Term::S0));
    // The queue of in1 is still 100 at time 2 in S0.
    assert!(!evaluate(&r.formula, &c.model).unwrap());
    let at_start = regress(&query(&c, "Poss(empty(I, in1, 0), S0)", Term::S0), &c).unwrap();
    assert!(!evaluate(&at_start, &c.model).unwrap());
}

#[test]
fn uniform_formula_is_left_alone() {
    let c = traffic();
    let w = query(&c, "que_init(I, in1) = 100 & Red(I, in1)", Term::S0);
    let r = regress(&w, &c).unwrap();
    assert!(evaluate(&r, &c.model).unwrap());
    let w = query(&c, "que_init(I, in1, S0) >= 0", Term::S0);
    assert_eq!(regress(&w, &c).unwrap(), crate::logic::simplify(&w));
}

#[test]
fn free_situation_is_rejected() {
    let c = traffic();
    let s = Var::sit("s");
    let w = parse_query(&c.theory, "Green(I, in1, s)", Term::S0, vec![s]).unwrap();
    assert!(matches!(
        regress(&w, &c),
        Err(RegressionError::NotRegressable(_))
    ));
}

#[test]
fn step_bound_is_enforced() {
    let c = traffic();
    let w = query(&c, "que(I, in1, 3) < 95", narrative(&c, NARRATIVE));
    assert_eq!(
        Regressor::new(&c).step_bound(1).regress(&w).unwrap_err(),
        RegressionError::StepBound(1)
    );
}

fn diagnose_src(c: &Compiled, q: &str, n: &str) -> DiagnosisReport {
    let (t, s) = (Var::real("t"), Var::sit("s"));
    let w = parse_query(&c.theory, q, Term::var(&s), vec![t.clone(), s.clone()]).unwrap();
    diagnose(
        &w,
        &t,
        &s,
        &parse_narrative(&c.theory, n).unwrap(),
        Some(rat(3)),
        c,
    )
    .unwrap()
}

#[test]
fn first_switch_is_responsible() {
    let c = traffic();
    let d = diagnose_src(&c, "que(I, in1, t) < 95", NARRATIVE);
    assert_eq!(
        d.attribution,
        Attribution::Action {
            index: 1,
            action: Some(parse_narrative(&c.theory, "switch(I)@1").unwrap().remove(0)),
            elapsed: ratio(1, 2),
            attained: false,
        }
    );
    assert_eq!(d.prefixes.len(), 3);
    assert!(d.prefixes[0].holds.is_empty());
    assert!(d.prefixes[1].at_end && !d.prefixes[1].throughout);
    assert!(d.prefixes[2].throughout);
}

#[test]
fn initially_true_and_never_true() {
    let c = traffic();
    assert_eq!(
        diagnose_src(&c, "que(I, in1, t) <= 100", NARRATIVE).attribution,
        Attribution::InitiallyTrue
    );
    let never = diagnose_src(&c, "que(I, in1, t) < 0", NARRATIVE);
    assert_eq!(never.attribution, Attribution::NeverTrue);
    assert!(never.prefixes.iter().all(|p| p.holds.is_empty()));
    assert_eq!(
        diagnose_src(&c, "que(I, in1, t) > 90", NARRATIVE).attribution,
        Attribution::FalseAtHorizon
    );
}

#[test]
fn attribution_to_the_initial_situation() {
    let c = traffic();
    // in2 is green in S0 and drains at 12 per unit until the first switch.
    let d = diagnose_src(&c, "que(I, in2, t) <= 54", "switch(I)@1");
    assert_eq!(
        d.attribution,
        Attribution::Action {
            index: 0,
            action: None,
            elapsed: rat(1) / rat(2),
            attained: true
        }
    );
}

#[test]
fn narrative_times_must_not_decrease() {
    let c = traffic();
    let (t, s) = (Var::real("t"), Var::sit("s"));
    let w = parse_query(
        &c.theory,
        "que(I, in1, t) < 95",
        Term::var(&s),
        vec![t.clone(), s.clone()],
    )
    .unwrap();
    let n = parse_narrative(&c.theory, "switch(I)@2; switch(I)@1").unwrap();
    assert!(matches!(
        diagnose(&w, &t, &s, &n, None, &c),
        Err(diagnose::DiagnoseError::Narrative(_))
    ));
}
