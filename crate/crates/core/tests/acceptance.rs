//! Acceptance run: one PASS/FAIL line per criterion, with the measured time
//! against its budget. Exits non-zero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use hybrid_sitcalc::arith::timeset::{self, TimeSet};
use hybrid_sitcalc::arith::{LinExpr, Lra};
use hybrid_sitcalc::dsl::{parse_narrative, parse_query};
use hybrid_sitcalc::eval::{
    check_executable, evaluate, evaluate_term, forward_simulate, ground, Simulation,
};
use hybrid_sitcalc::hybrid::{build_trajectory, check_invariance, check_trajectory, translate};
use hybrid_sitcalc::logic::{
    format_rat, is_uniform_in, rat, simplify, subst_formula, subst_term, CmpOp, Formula, Rat,
    Subst, Symbol, Term, Var,
};
use hybrid_sitcalc::regression::{diagnose, Attribution, Regressor};
use hybrid_sitcalc::sea::{build_pnf, compile_source, Compiled, Sea};
use rand::seq::SliceRandom;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s0_query(c: &Compiled, src: &str, sit: Term, scope: Vec<Var>) -> Result<Formula, String> {
    parse_query(&c.theory, src, sit, scope).map_err(|d| format!("{src}: {}", d.message))
}

fn golden() -> Check {
    let c = traffic();
    let m = &c.model;
    let lane = [Term::obj("I"), Term::obj("in1")];
    let flow = |r: &str| {
        m.value(
            &Symbol::new("flow"),
            &[Term::obj("I"), Term::obj("in1"), Term::obj(r)],
        )
        .cloned()
    };
    ensure(
        m.start == rat(0)
            && m.holds(&Symbol::new("Red"), &lane)
            && m.value(&Symbol::new("que_init"), &lane) == Some(&Term::Num(rat(100)))
            && [flow("out2"), flow("out3"), flow("out4")]
                == [Some(Term::int(5)), Some(Term::int(15)), Some(Term::int(10))],
        || "initial theory differs from the reference setup".into(),
    )?;
    let n = parse_narrative(&c.theory, NARRATIVE).map_err(|d| d.message)?;
    let w = s0_query(&c, "que(I, in1, 3) < 95", Term::do_seq(n), vec![])?;
    let r = Regressor::new(&c)
        .regress(&w)
        .map_err(|e| e.to_string())?
        .formula;
    let expected = s0_query(
        &c,
        "que_init(I, in1) - 10 * (2 - 1) - (15 + 5) * (3 - 2) < 95",
        Term::S0,
        vec![],
    )?;
    let (Formula::Cmp(CmpOp::Lt, l, r95), Formula::Cmp(CmpOp::Lt, el, e95)) = (&r, &expected)
    else {
        return Err(format!("unexpected shape: {r}"));
    };
    let same = LinExpr::from_term(l) == LinExpr::from_term(el)
        && LinExpr::from_term(r95) == LinExpr::from_term(e95);
    ensure(same && is_uniform_in(&r, &Term::S0), || {
        format!("regressed to {r}")
    })?;
    let v = evaluate_term(l, m).map_err(|e| e.to_string())?;
    let holds = evaluate(&r, m).map_err(|e| e.to_string())?;
    ensure(v == rat(70) && holds, || {
        format!("value {v}, verdict {holds}")
    })?;
    Ok(format!("{r}; value 70; true"))
}

fn diagnosis() -> Check {
    let c = traffic();
    let n = parse_narrative(&c.theory, NARRATIVE).map_err(|d| d.message)?;
    let (t, s) = (Var::real("t"), Var::sit("s"));
    let w = s0_query(
        &c,
        "que(I, in1, t) < 95",
        Term::var(&s),
        vec![t.clone(), s.clone()],
    )?;
    let d = diagnose(&w, &t, &s, &n, Some(rat(3)), &c).map_err(|e| e.to_string())?;
    match &d.attribution {
        Attribution::Action {
            action: Some(a),
            elapsed,
            ..
        } if *a == n[0] && *elapsed == ratio(1, 2) => Ok(format!("responsible {a}, elapsed 1/2")),
        other => Err(format!("{other:?}")),
    }
}

fn values_of(f: &Formula, y: &Var) -> Result<TimeSet, String> {
    timeset::solve(f, y, None, None).map_err(|e| e.to_string())
}

const DISPLAYED_SEA: &str = "exists q0: real, rl: outlane, rs: outlane, rr: outlane. \
    q0 = que_init(I, in1) & lt(I, in1, rl) & st(I, in1, rs) & rt(I, in1, rr) & \
    (LArr(I, in1) & q0 != 0 & y = q0 - flow(I, in1, rl) * TAU \
     | Green(I, in1) & q0 != 0 & y = q0 - (flow(I, in1, rs) + flow(I, in1, rr)) * TAU \
     | RArr(I, in1) & q0 != 0 & y = q0 - flow(I, in1, rr) * TAU \
     | Red(I, in1) & y = q0 \
     | !Red(I, in1) & q0 = 0 & y = 0)";

fn sea_equivalence() -> Check {
    let c = traffic();
    let sea = c.sea("que").ok_or("no axiom for que")?;
    let y = Var::real("y");
    let lane = vec![Term::obj("I"), Term::obj("in1")];
    let signals = ["Red", "LArr", "Green", "RArr"];
    let mut cases = 0;
    for signal in signals {
        for q0 in [0, 100] {
            for start in [rat(0), ratio(5, 2)] {
                for offset in [rat(0), rat(1), ratio(7, 2)] {
                    let mut m = c.model.clone();
                    m.start = start.clone();
                    for s in signals {
                        m.set_holds(&Symbol::new(s), lane.clone(), s == signal);
                    }
                    m.set_value(&Symbol::new("que_init"), lane.clone(), Term::int(q0));
                    let t = &start + &offset;
                    let compiled =
                        sea.instantiate(&lane, &Term::Num(t.clone()), &Term::var(&y), &Term::S0);
                    let got = values_of(&ground(&compiled, &m), &y)?;
                    let text = DISPLAYED_SEA.replace("TAU", &format!("({})", format_rat(&offset)));
                    let displayed = s0_query(&c, &text, Term::S0, vec![y.clone()])?;
                    let want = values_of(&ground(&displayed, &m), &y)?;
                    ensure(got.as_point().is_some() && got == want, || {
                        format!(
                            "{signal}, q0 = {q0}, t = start + {}: compiled {got}, displayed {want}",
                            format_rat(&offset)
                        )
                    })?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} groundings agree on a unique value"))
}

const OPS: [&str; 6] = ["<", "<=", "=", "!=", ">", ">="];

fn regression_oracle() -> Check {
    let mut rng = seeded(2024);
    let (mut cases, mut trues, mut theories) = (0, 0, 0);
    while theories < 500 {
        let th = random_theory(&mut rng);
        let c = compile_source(&th.src)
            .map_err(|d| format!("generated theory rejected: {d:?}\n{}", th.src))?;
        theories += 1;
        let (ntext, last) = random_narrative(&mut rng, &th, &c.model.start);
        let n = parse_narrative(&c.theory, &ntext).map_err(|d| d.message)?;
        let sit = Term::do_seq(n.clone());
        let sim = Simulation::run(&c, &n).map_err(|e| e.to_string())?;
        for _ in 0..3 {
            let at = &last + ratio(rng.gen_range(0..=6), 2);
            let val = forward_simulate(&c, &n, &at).map_err(|e| e.to_string())?;
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let m = rng.gen_range(0..th.temporals);
                let o = th.objects.choose(rng).unwrap().clone();
                let v = val
                    .get(&format!("f{m}"), &[Term::obj(&o)])
                    .cloned()
                    .unwrap();
                (format!("f{m}({o}, {})", format_rat(&at)), v)
            };
            let (a, va) = pick(&mut rng);
            let op = OPS.choose(&mut rng).unwrap();
            let delta = rng.gen_range(-1..=1);
            let q = match rng.gen_range(0..3) {
                0 => format!("{a} {op} {}", format_rat(&(va + rat(delta)))),
                1 => {
                    let (b, vb) = pick(&mut rng);
                    format!("{a} - {b} {op} {}", format_rat(&(va - vb + rat(delta))))
                }
                _ => {
                    let k = rng.gen_range(0..th.rels);
                    let o = th.objects.choose(&mut rng).unwrap();
                    format!(
                        "{a} {op} {} & P{k}({o}) | !({a} < {})",
                        format_rat(&(&va + rat(delta))),
                        format_rat(&va)
                    )
                }
            };
            let w = s0_query(&c, &q, sit.clone(), vec![])?;
            let r = Regressor::new(&c)
                .regress(&w)
                .map_err(|e| format!("{q}: {e}"))?
                .formula;
            ensure(is_uniform_in(&r, &Term::S0), || {
                format!("{q}: regressed formula not uniform in S0: {r}")
            })?;
            let by_regression = evaluate(&r, &c.model).map_err(|e| e.to_string())?;
            let by_simulation = sim.holds(&w).map_err(|e| e.to_string())?;
            ensure(by_regression == by_simulation, || {
                format!(
                    "{q} after {ntext}: regression {by_regression}, simulation {by_simulation}\n{}",
                    th.src
                )
            })?;
            cases += 1;
            trues += usize::from(by_regression);
        }
    }
    Ok(format!(
        "{theories} theories, {cases} queries ({trues} true), all agree"
    ))
}

fn binding(sea: &Sea, args: &[Term], t: &Rat) -> Subst {
    let mut b: Subst = sea
        .params
        .iter()
        .cloned()
        .zip(args.iter().cloned())
        .collect();
    b.insert(sea.time.clone(), Term::Num(t.clone()));
    b.insert(sea.sit.clone(), Term::S0);
    b
}

struct Instance<'a> {
    c: &'a Compiled,
    lra: Lra,
    sea: &'a Sea,
    b: Subst,
    args: Vec<Term>,
    sim: &'a Simulation<'a>,
}

/// Replaces temporal fluents at `S0` by their values.
fn resolve(f: &Formula, sim: &Simulation) -> Formula {
    fn term(t: &Term, sim: &Simulation) -> Term {
        match t {
            Term::Temporal(n, args, time, _) => {
                let at = time.as_num().expect("ground time");
                Term::Num(sim.temporal_value(0, n, args, at).expect("simulated value"))
            }
            _ => t.map_children(|c| term(c, sim)),
        }
    }
    if f.is_atom() {
        f.map_atom_terms(|t| term(t, sim))
    } else {
        f.map_children(|g| resolve(g, sim))
    }
}

impl Instance<'_> {
    fn ground(&self, f: &Formula) -> Formula {
        let g = simplify(&ground(&subst_formula(f, &self.b), &self.c.model));
        simplify(&resolve(&g, self.sim))
    }

    fn decide(&self, f: &Formula) -> Result<bool, String> {
        self.lra.decide(&simplify(f)).map_err(|e| e.to_string())
    }

    fn with_value(&self, f: &Formula, v: Term) -> Formula {
        let mut s = Subst::new();
        s.insert(self.sea.value.clone(), v);
        subst_formula(f, &s)
    }

    /// Checks the four properties; returns the number of candidate values.
    fn check(&self) -> Result<usize, String> {
        let (sea, y) = (self.sea, &self.sea.value);
        let head = sea.head();
        let original: Vec<_> = self
            .c
            .theory
            .tcas_for(&sea.fluent)
            .map(|t| head.adopt(t))
            .collect();
        let phi = self.ground(&build_pnf(&original));
        let at = format!("{}{:?}", sea.fluent, self.args);

        // (iii) splitting contexts keeps the defined values.
        let before = values_of(&phi, y)?;
        let after = values_of(&self.ground(&sea.pnf()), y)?;
        ensure(before == after, || {
            format!("{at}: values {before} before splitting, {after} after")
        })?;

        // (iv) exactly one branch fires.
        let fired = (0..sea.disjuncts())
            .map(|i| {
                evaluate(
                    &ground(&sea.context_at(i, &self.args, &Term::S0), &self.c.model),
                    &self.c.model,
                )
            })
            .collect::<Result<Vec<bool>, _>>()
            .map_err(|e| e.to_string())?;
        ensure(fired.iter().filter(|&&f| f).count() == 1, || {
            format!("{at}: branches firing {fired:?}")
        })?;
        let defined = values_of(&self.ground(&sea.rhs()), y)?;
        let value = defined
            .as_point()
            .cloned()
            .ok_or_else(|| format!("{at}: evolution axiom defines {defined}"))?;

        let z = Var::real("z_other");
        let phi_z = self.with_value(&phi, Term::var(&z));
        let wdp = original
            .iter()
            .try_fold(true, |ok, b| -> Result<bool, String> {
                let gamma = self.decide(&self.ground(&b.context))?;
                let some = !values_of(&self.ground(&b.law), y)?.is_empty();
                Ok(ok && (!gamma || some))
            })?;
        let cons = self.decide(&Formula::forall_many(
            [y.clone(), z.clone()],
            Formula::implies(
                Formula::and(vec![phi.clone(), phi_z.clone()]),
                Formula::eq(Term::var(y), Term::var(&z)),
            ),
        ))?;
        let psi = self.decide(&self.ground(&sea.psi()))?;
        let init = evaluate_term(&subst_term(&sea.init_term(), &self.b), &self.c.model)
            .map_err(|e| e.to_string())?;

        let mut candidates: BTreeSet<Rat> =
            [value.clone(), init.clone(), &value + rat(1), &init - rat(1)].into();
        if let Some(p) = before.as_point() {
            candidates.insert(p.clone());
        }
        for cand in &candidates {
            let yv = Term::Num(cand.clone());
            // A model interpreting f as `cand` at this point.
            let pnfca = self.decide(&Formula::forall(
                y.clone(),
                Formula::implies(phi.clone(), Formula::eq(Term::var(y), yv.clone())),
            ))?;
            let nnfca = self.decide(&Formula::not(Formula::exists(
                z.clone(),
                Formula::and(vec![phi_z.clone(), Formula::ne(yv.clone(), Term::var(&z))]),
            )))?;
            ensure(!(cons && pnfca) || nnfca, || {
                format!("{at}, f = {cand}: Cons and PNFCA hold but NNFCA fails")
            })?;

            let phi_y = self.decide(&self.with_value(&phi, yv.clone()))?;
            let sea1 = phi_y || (init == *cand && nnfca);
            let sea2 = phi_y || (init == *cand && !psi);
            ensure(!(wdp && cons) || sea1 == sea2, || {
                format!("{at}, y = {cand}: SEA1 {sea1}, SEA2 {sea2}")
            })?;
            ensure(sea2 == defined.contains(cand), || {
                format!("{at}, y = {cand}: compiled axiom disagrees with SEA2")
            })?;
        }
        Ok(candidates.len())
    }
}

fn compiled_axiom_properties() -> Check {
    let mut rng = seeded(99);
    let mut sources: Vec<String> = vec![TRAFFIC.to_string()];
    sources.extend((0..80).map(|_| random_theory(&mut rng).src));
    let (mut instances, mut values) = (0, 0);
    for src in &sources {
        let c = compile_source(src).map_err(|d| format!("{d:?}"))?;
        let lra = Lra::new(c.theory.object_valued());
        let sim = Simulation::run(&c, &[]).map_err(|e| e.to_string())?;
        for sea in &c.seas {
            let sorts: Vec<_> = sea.params.iter().map(|p| p.sort.clone()).collect();
            for args in c.theory.groundings(&sorts).unwrap_or_default() {
                for offset in [rat(0), rat(1), ratio(7, 2)] {
                    let t = &c.model.start + offset;
                    let inst = Instance {
                        c: &c,
                        lra: lra.clone(),
                        sea,
                        b: binding(sea, &args, &t),
                        args: args.clone(),
                        sim: &sim,
                    };
                    values += inst.check()?;
                    instances += 1;
                }
            }
        }
    }
    ensure(instances >= 200, || format!("only {instances} instances"))?;
    Ok(format!(
        "{instances} grounded instances, {values} candidate values"
    ))
}

fn hybrid_theorem() -> Check {
    let mut rng = seeded(6);
    let (mut agree, mut legal, mut violating, mut rejected) = (0, 0, 0, 0);
    for case in 0..120 {
        let g = *[10, 8, 6].choose(&mut rng).unwrap();
        let fall = [rat(1), ratio(1, 2), ratio(3, 2)]
            .choose(&mut rng)
            .unwrap()
            .clone();
        let keep = [ratio(1, 2), ratio(1, 4), ratio(3, 4)]
            .choose(&mut rng)
            .unwrap()
            .clone();
        let h = ball(g, &fall, &keep);
        let c = translate(&h).map_err(|d| format!("{d:?}"))?;
        let bounces = rng.gen_range(0..=4);
        let (mut n, _) = legal_bounces(&h, bounces + 1);
        let next = n.pop().unwrap();
        let Term::Action { time, .. } = &next else {
            unreachable!()
        };
        let landing = time.as_num().unwrap().clone();
        let last = if bounces == 0 {
            rat(0)
        } else {
            legal_bounces(&h, bounces).1
        };
        debug_assert!(last <= landing);
        let dt = &landing - &last;
        let mut overshoot = false;
        let tau = match rng.gen_range(0..6) {
            0 => last.clone(),
            1 => &last + &dt / rat(2),
            2 => landing.clone(),
            3 | 4 => {
                overshoot = true;
                &landing + ratio(rng.gen_range(1..=4), 8)
            }
            _ => {
                // A corrupted transition: late, or with the wrong reset.
                if let Some(Term::Action { args, time, .. }) = n.last_mut() {
                    if rng.gen_bool(0.5) {
                        **time = Term::Num(time.as_num().unwrap() + ratio(1, 8));
                    } else {
                        args[3] = Term::Num(args[3].as_num().unwrap() + rat(1));
                    }
                }
                match n.last() {
                    Some(Term::Action { time, .. }) => {
                        landing.clone().max(time.as_num().unwrap().clone())
                    }
                    _ => landing.clone(),
                }
            }
        };
        let executable = check_executable(&n, &c).executable;
        let inv = check_invariance(&h, &c, &n, &tau).map_err(|e| e.to_string())?;
        let eta = build_trajectory(&h, &c, &n, &tau).map_err(|e| e.to_string())?;
        let valid = check_trajectory(&h, &eta).is_ok();
        ensure((executable && inv.holds()) == valid, || {
            format!("case {case}: executable {executable}, invariance {inv:?}, trajectory valid {valid}")
        })?;
        if overshoot {
            // The ball leaves the invariant exactly at the landing time.
            let Some((_, times)) = &inv.violation else {
                return Err(format!("case {case}: overshooting to {tau} not reported"));
            };
            ensure(
                matches!(times.infimum(), Some((b, false)) if b.as_rat() == Some(&landing)),
                || format!("case {case}: violation {times}, landing at {landing}"),
            )?;
        }
        agree += 1;
        match (executable, valid) {
            (true, true) => legal += 1,
            (true, false) => violating += 1,
            _ => rejected += 1,
        }
    }
    ensure(legal > 0 && violating > 0, || {
        "cases do not mix legal and violating narratives".into()
    })?;
    Ok(format!("{agree} narratives agree ({legal} legal, {violating} leave the invariant, {rejected} not executable)"))
}

fn relative_satisfiability() -> Check {
    let hsc = env!("CARGO_BIN_EXE_hsc");
    let dir = std::env::temp_dir().join(format!("hsc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let good = dir.join("traffic.tbat");
    let bad = dir.join("contradiction.tbat");
    std::fs::write(&good, TRAFFIC).map_err(|e| e.to_string())?;
    std::fs::write(
        &bad,
        TRAFFIC.replace("Red(I, in1);", "Red(I, in1);  Green(I, in1);"),
    )
    .map_err(|e| e.to_string())?;
    let run = |p: &std::path::Path| Command::new(hsc).arg("check").arg(p).output();
    let ok = run(&good).map_err(|e| e.to_string())?;
    let ko = run(&bad).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    let stderr = String::from_utf8_lossy(&ko.stderr);
    ensure(ok.status.code() == Some(0), || {
        format!("consistent theory exits {:?}", ok.status.code())
    })?;
    ensure(ko.status.code() == Some(1), || {
        format!("contradictory theory exits {:?}", ko.status.code())
    })?;
    let witness = stderr
        .lines()
        .find(|l| l.contains("fails for"))
        .ok_or_else(|| format!("no witness in: {stderr}"))?;
    let shown = witness.rsplit_once("; ").map_or(witness, |(_, w)| w);
    Ok(format!("exit 0, then exit 1 with witness `{shown}`"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("golden regression", golden, Duration::from_secs(1)),
        ("diagnosis", diagnosis, Duration::from_secs(1)),
        (
            "evolution axiom equivalence",
            sea_equivalence,
            Duration::from_secs(1),
        ),
        (
            "regression vs simulation",
            regression_oracle,
            Duration::from_secs(60),
        ),
        (
            "compiled axiom properties",
            compiled_axiom_properties,
            Duration::from_secs(30),
        ),
        (
            "hybrid automaton correspondence",
            hybrid_theorem,
            Duration::from_secs(30),
        ),
        (
            "relative satisfiability",
            relative_satisfiability,
            Duration::from_secs(10),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let res = run();
        let took = t0.elapsed();
        let verdict = match &res {
            Ok(_) if took > budget => Err(format!("took {took:.2?}, budget {budget:.0?}")),
            Ok(d) => Ok(d.clone()),
            Err(e) => Err(e.clone()),
        };
        match verdict {
            Ok(d) => println!(
                "criterion {} {name}: PASS ({took:.2?} of {budget:.0?}) {d}",
                i + 1
            ),
            Err(e) => {
                failed += 1;
                println!(
                    "criterion {} {name}: FAIL ({took:.2?} of {budget:.0?}) {e}",
                    i + 1
                );
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
