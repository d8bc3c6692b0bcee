//! Finds which switch made the queue drop below 95 and how long it took.

use hybrid_sitcalc::dsl::{parse_narrative, parse_query};
use hybrid_sitcalc::logic::{format_rat, rat, Term, Var};
use hybrid_sitcalc::regression::{diagnose, Attribution};
use hybrid_sitcalc::sea::compile_source;

fn main() {
    let c = compile_source(include_str!("../data/traffic.tbat")).unwrap();
    let n = parse_narrative(&c.theory, "switch(I)@1; switch(I)@2").unwrap();
    let (t, s) = (Var::real("t"), Var::sit("s"));
    let w = parse_query(
        &c.theory,
        "que(I, in1, t) < 95",
        Term::var(&s),
        vec![t.clone(), s.clone()],
    )
    .unwrap();
    let d = diagnose(&w, &t, &s, &n, Some(rat(3)), &c).unwrap();
    for p in &d.prefixes {
        let last = p
            .action
            .as_ref()
            .map_or("S0".to_string(), |a| a.to_string());
        println!(
            "[{}, {}] after {last}: holds on {}",
            format_rat(&p.start),
            format_rat(&p.end),
            p.holds
        );
    }
    match d.attribution {
        Attribution::Action {
            action: Some(a),
            elapsed,
            ..
        } => {
            println!("responsible: {a}, true {} later", format_rat(&elapsed))
        }
        other => println!("{other:?}"),
    }
}
