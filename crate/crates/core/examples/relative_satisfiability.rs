//! A contradictory initial state is rejected with a witness naming the
//! failing constraint instance.

use hybrid_sitcalc::sea::compile_source;

fn main() {
    let good = include_str!("../data/traffic.tbat");
    let bad = good.replace("Red(I, in1);", "Red(I, in1);  Green(I, in1);");
    println!(
        "consistent theory accepted: {}",
        compile_source(good).is_ok()
    );
    match compile_source(&bad) {
        Ok(_) => println!("contradiction not detected"),
        Err(ds) => {
            for d in ds {
                println!("{d}");
            }
        }
    }
}
