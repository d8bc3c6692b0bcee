//! Builds the trajectory of a bouncing ball from a narrative of bounces and
//! checks that it stays above the floor.

use hybrid_sitcalc::dsl::parse_narrative;
use hybrid_sitcalc::eval::check_executable;
use hybrid_sitcalc::hybrid::{
    build_trajectory, check_invariance, check_trajectory, parse_ha, translate,
};
use hybrid_sitcalc::logic::{format_rat, ratio};

fn main() {
    let h = parse_ha(include_str!("../data/bounce.ha")).unwrap();
    let c = translate(&h).unwrap();
    let n = parse_narrative(
        &c.theory,
        "trans(fall, fall, 0, 5, 1); trans(fall, fall, 0, 5/2, 2)",
    )
    .unwrap();
    println!("executable: {}", check_executable(&n, &c).executable);

    for tau in [ratio(5, 2), ratio(3, 1)] {
        let eta = build_trajectory(&h, &c, &n, &tau).unwrap();
        println!("\nuntil {}:\n{eta}", format_rat(&tau));
        match check_trajectory(&h, &eta) {
            Ok(()) => println!("valid trajectory"),
            Err(v) => println!("{v}"),
        }
        let inv = check_invariance(&h, &c, &n, &tau).unwrap();
        match &inv.violation {
            None => println!("invariant holds throughout"),
            Some((j, times)) => println!("invariant fails after {j} bounces on {times}"),
        }
    }
}
