//! Encodes a four-phase traffic light as a theory and compiles it.
//!
//! `cargo run --example hybrid_translate [path.ha]`

use hybrid_sitcalc::hybrid::{ha_to_tbat, parse_ha, translate};

fn main() {
    let src = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{p}: {e}")),
        None => include_str!("../data/traffic_light.ha").to_string(),
    };
    let h = parse_ha(&src).unwrap_or_else(|ds| {
        ds.iter().for_each(|d| eprintln!("{d}"));
        std::process::exit(1)
    });
    println!("{}", ha_to_tbat(&h));
    let c = translate(&h).unwrap();
    println!("{}", c.render());
}
