//! Checks narratives for decreasing times and unmet preconditions.

use hybrid_sitcalc::dsl::parse_narrative;
use hybrid_sitcalc::eval::check_executable;
use hybrid_sitcalc::sea::compile_source;

fn main() {
    let c = compile_source(include_str!("../data/traffic.tbat")).unwrap();
    for text in [
        "switch(I)@1; switch(I)@2",
        "switch(I)@2; switch(I)@1",
        "switch(I)@1; empty(I, in1)@1",
    ] {
        let n = parse_narrative(&c.theory, text).unwrap();
        let e = check_executable(&n, &c);
        println!(
            "{text}: {}",
            if e.executable {
                "executable"
            } else {
                "not executable"
            }
        );
        for d in &e.diagnostics {
            println!("  {d}");
        }
    }
}
