//! Shared fixtures: the corpus, a generator of small random theories, and
//! bouncing-ball automata with rational bounce times.
#![allow(dead_code)]

use std::fmt::Write;

use hybrid_sitcalc::hybrid::trajectory::{point_at, reset_point};
use hybrid_sitcalc::hybrid::{first_enabled, parse_ha, trans_action, HybridAutomaton};
use hybrid_sitcalc::logic::{format_rat, rat, Rat, Term};
use hybrid_sitcalc::sea::{compile_source, Compiled};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const TRAFFIC: &str = include_str!("../../data/traffic.tbat");
pub const BOUNCE: &str = include_str!("../../data/bounce.ha");
pub const LIGHT: &str = include_str!("../../data/traffic_light.ha");
pub const NARRATIVE: &str = "switch(I)@1; switch(I)@2";

pub fn traffic() -> Compiled {
    compile_source(TRAFFIC).unwrap()
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random theory with its sizes, for reuse by queries.
#[derive(Clone, Debug)]
pub struct RandomTheory {
    pub src: String,
    pub objects: Vec<String>,
    pub rels: usize,
    pub temporals: usize,
    pub actions: usize,
}

fn law(rng: &mut ChaCha8Rng, m: usize) -> String {
    let rate = match rng.gen_range(0..4) {
        0 => "rate(x)".to_string(),
        _ => rng.gen_range(-3..=3).to_string(),
    };
    let mut l = format!("y = f{m}_init(x, s) + {rate} * (t - start(s))");
    // A lower fluent may feed into a higher one, keeping the theory stratified.
    if m > 0 && rng.gen_bool(0.3) {
        let j = rng.gen_range(0..m);
        write!(l, " + f{j}(x, t, s) - f{j}_init(x, s)").unwrap();
    }
    l
}

/// At most three objects, relational fluents, temporal fluents and four
/// actions, with linear laws whose contexts are literals of the relational
/// fluents. Some fluents share a law on overlapping contexts.
pub fn random_theory(rng: &mut ChaCha8Rng) -> RandomTheory {
    let n_obj = rng.gen_range(1..=3);
    let rels = rng.gen_range(1..=3);
    let temporals = rng.gen_range(1..=3);
    let actions = rng.gen_range(1..=4);
    let objects: Vec<String> = (1..=n_obj).map(|i| format!("o{i}")).collect();
    let mut s = String::new();
    writeln!(s, "sorts {{\n  obj = {{ {} }};\n}}\n", objects.join(", ")).unwrap();
    writeln!(s, "statics {{\n  fun rate(obj): real;\n}}\n").unwrap();
    s += "actions {\n";
    for i in 0..actions {
        writeln!(s, "  a{i}(obj);").unwrap();
    }
    s += "}\n\nfluents {\n";
    for k in 0..rels {
        writeln!(s, "  rel P{k}(obj);").unwrap();
    }
    for m in 0..temporals {
        writeln!(s, "  temporal f{m}(obj);").unwrap();
    }
    s += "}\n\nposs {\n";
    for i in 0..actions {
        writeln!(s, "  Poss(a{i}(x, t), s) <-> start(s) <= t;").unwrap();
    }
    s += "}\n\nssa {\n";
    for k in 0..rels {
        let on = rng.gen_range(0..actions);
        let off = rng.gen_range(0..actions);
        let hit = |i: usize, rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                format!("(exists t: real. a = a{i}(x, t))")
            } else {
                format!("(exists z: obj, t: real. a = a{i}(z, t))")
            }
        };
        let (h_on, h_off) = (hit(on, rng), hit(off, rng));
        if on == off {
            writeln!(
                s,
                "  P{k}(x, do(a, s)) <-> {h_on} & !P{k}(x, s) | P{k}(x, s) & !{h_on};"
            )
            .unwrap();
        } else {
            writeln!(s, "  P{k}(x, do(a, s)) <-> {h_on} | P{k}(x, s) & !{h_off};").unwrap();
        }
    }
    s += "}\n\ninit-ssa {\n";
    for m in 0..temporals {
        if rng.gen_bool(0.5) {
            let i = rng.gen_range(0..actions);
            writeln!(
                s,
                "  f{m}_init(x, do(a, s)) {{ a{i}(x, t) => {}; }}",
                rng.gen_range(-5..=10)
            )
            .unwrap();
        } else {
            writeln!(s, "  f{m}_init(x, do(a, s)) {{ }}").unwrap();
        }
    }
    s += "}\n\ntca {\n";
    for m in 0..temporals {
        let k = rng.gen_range(0..rels);
        let a = law(rng, m);
        writeln!(s, "  f{m}(x, t, s) = y when P{k}(x, s) then {a};").unwrap();
        if rels > 1 {
            let mut others: Vec<usize> = (0..rels).filter(|&l| l != k).collect();
            others.shuffle(rng);
            let l = others[0];
            match rng.gen_range(0..4) {
                0 | 1 => {
                    let b = law(rng, m);
                    writeln!(
                        s,
                        "  f{m}(x, t, s) = y when !P{k}(x, s) & P{l}(x, s) then {b};"
                    )
                    .unwrap();
                }
                2 => writeln!(s, "  f{m}(x, t, s) = y when P{l}(x, s) then {a};").unwrap(),
                _ => {}
            }
        }
    }
    s += "}\n\ninit {\n";
    writeln!(s, "  start = {};", rng.gen_range(0..=2)).unwrap();
    for o in &objects {
        writeln!(s, "  rate({o}) = {};", rng.gen_range(-2..=4)).unwrap();
        for k in 0..rels {
            if rng.gen_bool(0.5) {
                writeln!(s, "  P{k}({o});").unwrap();
            }
        }
        for m in 0..temporals {
            writeln!(s, "  f{m}_init({o}) = {};", rng.gen_range(-5..=10)).unwrap();
        }
    }
    s += "}\n";
    RandomTheory {
        src: s,
        objects,
        rels,
        temporals,
        actions,
    }
}

/// Up to four actions at nondecreasing half-integer times from `start`.
pub fn random_narrative(rng: &mut ChaCha8Rng, th: &RandomTheory, start: &Rat) -> (String, Rat) {
    let mut now = start.clone();
    let mut parts = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        now += ratio(rng.gen_range(0..=4), 2);
        let i = rng.gen_range(0..th.actions);
        let o = th.objects.choose(rng).unwrap();
        parts.push(format!("a{i}({o})@{}", format_rat(&now)));
    }
    (parts.join("; "), now)
}

/// A ball dropped so that it lands after `fall` seconds under gravity `g`,
/// keeping `keep` of its speed at each bounce.
pub fn ball(g: i64, fall: &Rat, keep: &Rat) -> HybridAutomaton {
    let h0 = rat(g) * fall * fall / rat(2);
    let src = BOUNCE
        .replace(
            "5 * t * t",
            &format!("{} * t * t", format_rat(&(rat(g) / rat(2)))),
        )
        .replace("v - 10 * t", &format!("v - {g} * t"))
        .replace("-1/2 * v", &format!("-{} * v", format_rat(keep)))
        .replace("h = 5;", &format!("h = {};", format_rat(&h0)));
    parse_ha(&src).unwrap()
}

/// `n` bounces, each at the earliest time the guard holds, and the time
/// of the last one.
pub fn legal_bounces(h: &HybridAutomaton, n: usize) -> (Vec<Term>, Rat) {
    let e = &h.edges[0];
    let (mut x, mut now) = (h.start.1.clone(), rat(0));
    let mut out = Vec::new();
    for _ in 0..n {
        let dt = first_enabled(h, e, &x).unwrap();
        let end = point_at(h, &e.from, &x, &dt).unwrap();
        x = reset_point(h, e, &end).unwrap();
        now += dt;
        out.push(trans_action(&e.from, &e.to, &x, &now));
    }
    (out, now)
}
