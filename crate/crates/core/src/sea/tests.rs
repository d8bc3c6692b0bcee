use super::*;
use crate::logic::simplify;

const TRAFFIC: &str = include_str!("../../data/traffic.tbat");

const BALL: &str = "
sorts { ball = { B }; }
actions { drop(ball); catch(ball); }
fluents { rel Falling(ball); temporal vel(ball); }
poss {
  Poss(drop(b, t), s) <-> start(s) <= t & !Falling(b, s);
  Poss(catch(b, t), s) <-> start(s) <= t & Falling(b, s);
}
ssa {
  Falling(b, do(a, s)) <-> (exists t: real. a = drop(b, t)) | Falling(b, s) & !(exists t: real. a = catch(b, t));
}
init-ssa { vel_init(b, do(a, s)) { catch(b, t) => 0; } }
tca {
  vel(b, t, s) = y when Falling(b, s) then y = vel_init(b, s) - 10 * (t - start(s));
}
init { start = 0; vel_init(B) = 0; }
";

fn compiled(src: &str) -> Compiled {
    compile_source(src).unwrap_or_else(|d| panic!("{}", d.iter().map(|x| x.to_string()).join("\n")))
}

fn errors(src: &str) -> Vec<Diagnostic> {
    match compile_source(src) {
        Ok(c) => panic!("expected errors, got {}", c.render()),
        Err(d) => d.into_iter().filter(|d| d.is_error()).collect(),
    }
}

#[test]
fn traffic_sea_has_four_branches_and_closure() {
    let c = compiled(TRAFFIC);
    assert!(c.warnings.is_empty(), "{:?}", c.warnings);
    let sea = c.sea("que").unwrap();
    assert_eq!(sea.branches.len(), 4);
    assert!(sea.frame);
    assert_eq!(sea.disjuncts(), 5);
    for (b, t) in sea.branches.iter().zip(&c.theory.tcas) {
        assert_eq!(b.context, t.context);
        assert_eq!(b.law, t.law);
    }
    let init = c.init_ssa("que_init").unwrap();
    assert_eq!(init.cases.len(), 1);
    let text = c.render();
    assert!(text.contains("que_init(i, r, do(a, s)) = y <->"), "{text}");
}

#[test]
fn empty_change_set_gives_frame_only() {
    let src = BALL.replace(
        "vel(b, t, s) = y when Falling(b, s) then y = vel_init(b, s) - 10 * (t - start(s));",
        "",
    );
    let c = compiled(&src);
    let sea = c.sea("vel").unwrap();
    assert!(sea.branches.is_empty());
    assert!(sea.frame);
    assert_eq!(
        simplify(&sea.rhs()),
        Formula::Eq(Term::var(&sea.value), sea.init_term())
    );
    assert_eq!(build_pnf(&sea.branches), Formula::False);
}

#[test]
fn falling_ball_has_two_disjuncts() {
    let c = compiled(BALL);
    let sea = c.sea("vel").unwrap();
    assert_eq!(sea.disjuncts(), 2);
}

const OVERLAP: &str = "
sorts { o = { c, d }; }
actions { go(o); }
fluents { rel P(o); rel Q(o); temporal f(o); }
poss { Poss(go(x, t), s) <-> start(s) <= t; }
ssa {
  P(x, do(a, s)) <-> P(x, s);
  Q(x, do(a, s)) <-> Q(x, s);
}
init-ssa { f_init(x, do(a, s)) { } }
tca {
  f(x, t, s) = y when P(x, s) then y = f_init(x, s) + LAWA;
  f(x, t, s) = y when Q(x, s) then y = f_init(x, s) + LAWB;
}
init { start = 0; P(c); Q(c); f_init(_) = 1; }
";

#[test]
fn overlapping_contexts_are_split_three_ways() {
    let src = OVERLAP
        .replace("LAWA", "t - start(s)")
        .replace("LAWB", "t - start(s)");
    let c = compiled(&src);
    let sea = c.sea("f").unwrap();
    let contexts: Vec<String> = sea.branches.iter().map(|b| b.context.to_string()).collect();
    assert_eq!(
        contexts,
        [
            "P(x, s) & !Q(x, s)",
            "!P(x, s) & Q(x, s)",
            "P(x, s) & Q(x, s)"
        ]
    );
    assert!(sea.frame);
}

#[test]
fn overlapping_contexts_with_different_laws_conflict() {
    let src = OVERLAP
        .replace("LAWA", "t - start(s)")
        .replace("LAWB", "2 * (t - start(s))");
    let errs = errors(&src);
    assert!(
        errs.iter().any(|d| d.code == "overlap-conflict"),
        "{errs:?}"
    );
}

#[test]
fn offset_law_breaks_initial_agreement() {
    let src = TRAFFIC.replace(
        "then y = que_init(i, r, s);",
        "then y = que_init(i, r, s) + 1;",
    );
    let errs = errors(&src);
    let d = errs
        .iter()
        .find(|d| d.code == "inconsistent-law")
        .unwrap_or_else(|| panic!("{errs:?}"));
    assert!(d.message.contains("disagrees"), "{}", d.message);
}

#[test]
fn square_law_is_not_functional() {
    let src = BALL
        .replace(
            "fluents {",
            "statics { def fun sq(x: real): real := x * x; }\nfluents {",
        )
        .replace(
            "then y = vel_init(b, s) - 10 * (t - start(s));",
            "then sq(y) = t;",
        );
    let errs = errors(&src);
    let d = errs
        .iter()
        .find(|d| d.code == "inconsistent-law")
        .unwrap_or_else(|| panic!("{errs:?}"));
    assert!(d.message.contains("more than one value"), "{}", d.message);
}

#[test]
fn law_without_value_is_reported() {
    let src = BALL.replace(
        "then y = vel_init(b, s) - 10 * (t - start(s));",
        "then y < t & y > t;",
    );
    let errs = errors(&src);
    assert!(
        errs.iter().any(|d| d.message.contains("defines no value")),
        "{errs:?}"
    );
}

#[test]
fn overlapping_effect_cases_are_rejected() {
    let src = TRAFFIC.replace(
        "empty(i, r, t) => 0;",
        "empty(i, r, t) => 0; empty(i, r, t) => 1;",
    );
    let errs = errors(&src);
    assert!(errs.iter().any(|d| d.code == "effect-overlap"), "{errs:?}");
}

#[test]
fn init_ssa_shape() {
    let c = compiled(TRAFFIC);
    let init = c.init_ssa("que_init").unwrap();
    let text = init.to_string();
    assert!(text.contains("a = empty(i, r, t)"), "{text}");
    assert!(text.contains("y = que(i, r, time(a), s)"), "{text}");
    let src = TRAFFIC.replace("empty(i, r, t) => 0;", "");
    let c = compiled(&src);
    let init = c.init_ssa("que_init").unwrap();
    assert_eq!(init.omega().to_string(), "y = que(i, r, time(a), s)");
}
