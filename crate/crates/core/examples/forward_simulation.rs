//! Steps the traffic junction forward and samples the queue, without
//! regression. Each sample simulates the actions that have happened by then.

use hybrid_sitcalc::dsl::parse_narrative;
use hybrid_sitcalc::eval::forward_simulate;
use hybrid_sitcalc::logic::{format_rat, ratio, Term};
use hybrid_sitcalc::sea::compile_source;

fn main() {
    let c = compile_source(include_str!("../data/traffic.tbat")).unwrap();
    let n = parse_narrative(
        &c.theory,
        "switch(I)@1; switch(I)@2; switch(I)@4; switch(I)@5",
    )
    .unwrap();
    let lane = [Term::obj("I"), Term::obj("in1")];
    for half in 0..=12 {
        let at = ratio(half, 2);
        let happened = n
            .iter()
            .take_while(|a| matches!(a, Term::Action { time, .. } if time.as_num() <= Some(&at)))
            .count();
        let v = forward_simulate(&c, &n[..happened], &at).unwrap();
        let q = v.get("que", &lane).unwrap();
        println!(
            "t = {:>3}  que = {:>4}  in {}",
            format_rat(&at),
            format_rat(q),
            v.situation
        );
    }
}
