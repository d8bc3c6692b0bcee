//! Regresses only down to an intermediate situation, then finishes the job
//! from there; both routes give the same answer in `S0`.

use hybrid_sitcalc::dsl::{parse_narrative, parse_query};
use hybrid_sitcalc::eval::evaluate;
use hybrid_sitcalc::logic::Term;
use hybrid_sitcalc::regression::{Mode, Regressor};
use hybrid_sitcalc::sea::compile_source;

fn main() {
    let c = compile_source(include_str!("../data/traffic.tbat")).unwrap();
    let n = parse_narrative(&c.theory, "switch(I)@1; switch(I)@2; switch(I)@4").unwrap();
    let w = parse_query(
        &c.theory,
        "que(I, in1, 5) < 60",
        Term::do_seq(n.clone()),
        vec![],
    )
    .unwrap();
    let reg = Regressor::new(&c);

    let stop = Term::do_seq(n[..1].to_vec());
    let partial = reg.regress_to(&w, &stop).unwrap().formula;
    println!("down to {stop}:\n  {partial}");
    let full = reg.regress(&w).unwrap().formula;
    let rest = reg.regress(&partial).unwrap().formula;
    println!(
        "directly:     {full}  ({})",
        evaluate(&full, &c.model).unwrap()
    );
    println!(
        "in two steps: {rest}  ({})",
        evaluate(&rest, &c.model).unwrap()
    );

    // Symbolic mode keeps every branch instead of deciding contexts.
    let sym = Regressor::new(&c)
        .mode(Mode::Symbolic)
        .regress(&w)
        .unwrap()
        .formula;
    println!(
        "symbolic ({} nodes) evaluates to {}",
        sym.size(),
        evaluate(&sym, &c.model).unwrap()
    );
}
