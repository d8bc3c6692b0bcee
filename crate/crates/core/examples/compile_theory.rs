//! Compiles the traffic-junction theory and prints its evolution axioms.
//!
//! `cargo run --example compile_theory [path.tbat]`

use hybrid_sitcalc::sea::compile_source;

fn main() {
    let src = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{p}: {e}")),
        None => include_str!("../data/traffic.tbat").to_string(),
    };
    match compile_source(&src) {
        Ok(c) => {
            for w in &c.warnings {
                eprintln!("{w}");
            }
            println!("{}", c.render());
            for sea in &c.seas {
                println!("// {}: {} branches", sea.fluent, sea.disjuncts());
            }
        }
        Err(ds) => {
            for d in ds {
                eprintln!("{d}");
            }
            std::process::exit(1);
        }
    }
}
