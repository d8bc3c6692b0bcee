//! Regresses a timed query about the queue after two switches, prints each
//! rewrite, and evaluates the result in the initial model.

use hybrid_sitcalc::dsl::{parse_narrative, parse_query};
use hybrid_sitcalc::eval::{evaluate, evaluate_term};
use hybrid_sitcalc::logic::{format_rat, Formula, Term};
use hybrid_sitcalc::regression::Regressor;
use hybrid_sitcalc::sea::compile_source;

fn main() {
    let c = compile_source(include_str!("../data/traffic.tbat")).unwrap();
    let n = parse_narrative(&c.theory, "switch(I)@1; switch(I)@2").unwrap();
    let w = parse_query(&c.theory, "que(I, in1, 3) < 95", Term::do_seq(n), vec![]).unwrap();
    println!("query:     {w}");

    let r = Regressor::new(&c).regress(&w).unwrap();
    for (i, step) in r.trace.iter().enumerate() {
        println!(
            "{:>3} {:<15} depth {}  {}",
            i + 1,
            step.rule,
            step.depth,
            step.after
        );
    }
    println!("regressed: {}", r.formula);
    if let Formula::Cmp(_, lhs, _) = &r.formula {
        println!(
            "value:     {}",
            format_rat(&evaluate_term(lhs, &c.model).unwrap())
        );
    }
    println!("verdict:   {}", evaluate(&r.formula, &c.model).unwrap());
}
