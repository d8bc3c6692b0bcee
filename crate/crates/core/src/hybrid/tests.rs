use super::trajectory::{point_at, reset_point};
use super::*;
use crate::eval::check_executable;
use crate::logic::{rat, Rat};

const BOUNCE: &str = include_str!("../../data/bounce.ha");
const LIGHT: &str = include_str!("../../data/traffic_light.ha");

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Bounces at the earliest enabled time, `n` times.
fn bounces(h: &HybridAutomaton, n: usize) -> (Vec<crate::logic::Term>, Rat) {
    let e = &h.edges[0];
    let (mut x, mut now) = (h.start.1.clone(), rat(0));
    let mut out = Vec::new();
    for _ in 0..n {
        let dt = first_enabled(h, e, &x).unwrap();
        let end = point_at(h, "fall", &x, &dt).unwrap();
        x = reset_point(h, e, &end).unwrap();
        now += dt;
        out.push(trans_action("fall", "fall", &x, &now));
    }
    (out, now)
}

#[test]
fn parse_and_print_round_trip() {
    for src in [BOUNCE, LIGHT] {
        let h = parse_ha(src).unwrap();
        assert_eq!(parse_ha(&print_ha(&h)).unwrap(), h);
    }
}

#[test]
fn structural_errors() {
    let bad = "vars x; states a; flow a { x = x + t * t * t; } start a { x = 0; }";
    let errs = parse_ha(bad).unwrap_err();
    assert!(errs.iter().any(|d| d.code == "flow-degree"), "{errs:?}");
    let bad = "vars x; states a; flow a { x = 1 + t; } start a { x = 0; }";
    assert!(parse_ha(bad)
        .unwrap_err()
        .iter()
        .any(|d| d.code == "flow-origin"));
    let bad = "vars Q; states a; flow a { } start a { Q = 0; }";
    assert!(parse_ha(bad)
        .unwrap_err()
        .iter()
        .any(|d| d.code == "reserved-name"));
    let bad = "vars x; states a; flow a { } edge a -> b; start a { x = 0; }";
    assert!(parse_ha(bad)
        .unwrap_err()
        .iter()
        .any(|d| d.code == "unknown-state"));
    let bad = "vars x;\nstates a;\nflow a { y = 1; }\nstart a { x = 0; }";
    let errs = parse_ha(bad).unwrap_err();
    assert!(errs[0].message.starts_with("line 3:"), "{errs:?}");
}

#[test]
fn encodings_compile_without_warnings() {
    for src in [BOUNCE, LIGHT] {
        let h = parse_ha(src).unwrap();
        let c = translate(&h).unwrap_or_else(|d| panic!("{d:?}\n{}", ha_to_tbat(&h)));
        assert!(c.warnings.is_empty(), "{:?}", c.warnings);
    }
}

#[test]
fn bounce_times_and_points() {
    let h = parse_ha(BOUNCE).unwrap();
    let (n, end) = bounces(&h, 3);
    assert_eq!(end, r(5, 2));
    assert_eq!(
        n[2],
        trans_action("fall", "fall", &[rat(0), r(5, 4)], &r(5, 2))
    );
}

#[test]
fn legal_bounces_are_executable_trajectories() {
    let h = parse_ha(BOUNCE).unwrap();
    let c = translate(&h).unwrap();
    let (n, end) = bounces(&h, 4);
    assert!(check_executable(&n, &c).executable);
    let tau = end + r(1, 8);
    let eta = build_trajectory(&h, &c, &n, &tau).unwrap();
    assert_eq!(eta.segments.len(), 5);
    assert_eq!(eta.segments[1].entry, vec![rat(0), rat(5)]);
    assert_eq!(eta.segments[0].duration, Duration::Finite(rat(1)));
    assert_eq!(check_trajectory(&h, &eta), Ok(()));
    assert!(check_invariance(&h, &c, &n, &tau).unwrap().holds());
}

#[test]
fn falling_through_the_floor() {
    let h = parse_ha(BOUNCE).unwrap();
    let c = translate(&h).unwrap();
    let tau = r(3, 2);
    let eta = build_trajectory(&h, &c, &[], &tau).unwrap();
    let v = check_trajectory(&h, &eta).unwrap_err();
    assert_eq!((v.condition, v.index), (Condition::Invariant, 0));
    let rep = check_invariance(&h, &c, &[], &tau).unwrap();
    assert_eq!(rep.violation.unwrap().0, 0);
}

#[test]
fn early_bounce_is_not_executable() {
    let h = parse_ha(BOUNCE).unwrap();
    let c = translate(&h).unwrap();
    let a = trans_action("fall", "fall", &[rat(0), rat(5)], &r(1, 2));
    assert!(!check_executable(&[a], &c).executable);
}

#[test]
fn junction_and_initial_violations() {
    let h = parse_ha(BOUNCE).unwrap();
    let seg = |d: Rat, h0: i64, v: i64| Segment {
        duration: Duration::Finite(d),
        state: "fall".into(),
        entry: vec![rat(h0), rat(v)],
    };
    let eta = Trajectory {
        segments: vec![seg(rat(1), 5, 0), seg(rat(1), 0, 7)],
    };
    assert_eq!(
        check_trajectory(&h, &eta).unwrap_err().condition,
        Condition::Junction
    );
    let eta = Trajectory {
        segments: vec![seg(rat(0), 5, 1)],
    };
    assert_eq!(
        check_trajectory(&h, &eta).unwrap_err().condition,
        Condition::Initial
    );
    let eta = Trajectory {
        segments: vec![seg(rat(-1), 5, 0)],
    };
    assert_eq!(
        check_trajectory(&h, &eta).unwrap_err().condition,
        Condition::Durations
    );
    let eta = Trajectory {
        segments: vec![Segment {
            duration: Duration::Infinite,
            state: "fly".into(),
            entry: vec![],
        }],
    };
    assert_eq!(
        check_trajectory(&h, &eta).unwrap_err().condition,
        Condition::States
    );
}

#[test]
fn traffic_light_cycle() {
    let h = parse_ha(LIGHT).unwrap();
    let c = translate(&h).unwrap();
    // Red for 1, left arrow for 2 (100 -> 80), green for 3 (80 -> 20).
    let n = vec![
        trans_action("Red", "LArr", &[rat(100)], &rat(1)),
        trans_action("LArr", "Green", &[rat(80)], &rat(3)),
        trans_action("Green", "RArr", &[rat(20)], &rat(6)),
    ];
    assert!(check_executable(&n, &c).executable);
    let ok = build_trajectory(&h, &c, &n, &rat(10)).unwrap();
    assert_eq!(check_trajectory(&h, &ok), Ok(()));
    assert!(check_invariance(&h, &c, &n, &rat(10)).unwrap().holds());
    // The right arrow drains the remaining 20 cars by time 10.
    let late = build_trajectory(&h, &c, &n, &rat(11)).unwrap();
    assert_eq!(
        check_trajectory(&h, &late).unwrap_err().condition,
        Condition::Invariant
    );
    assert_eq!(
        check_invariance(&h, &c, &n, &rat(11))
            .unwrap()
            .violation
            .map(|v| v.0),
        Some(3)
    );
}
