mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::{BOUNCE, NARRATIVE, TRAFFIC};
use serde_json::Value;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("hsc-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn hsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsc"))
        .args(args)
        .env_remove("HSC_FORMAT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_accepts_the_traffic_theory() {
    let dir = Scratch::new("check");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let o = hsc(&["check", path(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = hsc(&["check", "/nonexistent/theory.tbat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/theory.tbat"));
}

#[test]
fn cyclic_evolution_axioms_are_rejected() {
    let dir = Scratch::new("cycle");
    let t = dir.file(
        "cycle.tbat",
        "sorts { obj = { o }; }
actions { go(obj); }
fluents { rel P(obj); temporal f(obj); temporal g(obj); }
poss { Poss(go(x, t), s) <-> start(s) <= t; }
ssa { P(x, do(a, s)) <-> P(x, s); }
init-ssa { f_init(x, do(a, s)) { } g_init(x, do(a, s)) { } }
tca {
  f(x, t, s) = y when P(x, s) then y = g(x, t, s) - g_init(x, s) + f_init(x, s);
  g(x, t, s) = y when P(x, s) then y = f(x, t, s) - f_init(x, s) + g_init(x, s);
}
init { start = 0; P(o); f_init(o) = 1; g_init(o) = 2; }
",
    );
    let o = hsc(&["check", path(&t)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cycle"), "{}", stderr(&o));
}

#[test]
fn compile_shows_five_branches_for_the_queue() {
    let dir = Scratch::new("compile");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let o = hsc(&["--format", "structured", "compile", path(&t)]);
    assert_eq!(o.status.code(), Some(0));
    let que = records(&o)
        .into_iter()
        .find(|r| r["record"] == "sea" && r["fluent"] == "que")
        .unwrap();
    assert_eq!(que["disjuncts"], 5);
}

#[test]
fn query_verdict_sets_the_exit_code() {
    let dir = Scratch::new("verdict");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let yes = hsc(&["query", path(&t), "que(I, in1, 3) < 95", "-n", NARRATIVE]);
    assert_eq!(yes.status.code(), Some(0));
    assert!(
        stdout(&yes).contains("que_init(I, in1, S0) - 10 - 20 < 95"),
        "{}",
        stdout(&yes)
    );
    let no = hsc(&["query", path(&t), "que(I, in1, 3) < 60", "-n", NARRATIVE]);
    assert_eq!(no.status.code(), Some(1));
    let bad = hsc(&["query", path(&t), "que(I, in1) < 60"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn trace_lists_rules_and_ends_uniform() {
    let dir = Scratch::new("trace");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let o = hsc(&[
        "--format",
        "structured",
        "query",
        path(&t),
        "que(I, in1, 3) < 95",
        "-n",
        NARRATIVE,
        "--trace",
    ]);
    let rs = records(&o);
    let rules: Vec<&str> = rs
        .iter()
        .filter(|r| r["record"] == "step")
        .map(|r| r["rule"].as_str().unwrap())
        .collect();
    assert_eq!(rules.first(), Some(&"temporal-sea"));
    assert!(rules.contains(&"init-ssa") && rules.contains(&"start-of-do"));
    let last = rs.iter().rev().find(|r| r["record"] == "step").unwrap();
    assert!(!last["after"].as_str().unwrap().contains("do("));
}

#[test]
fn structured_output_is_stable_and_env_selected() {
    let dir = Scratch::new("stable");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let args = [
        "query",
        path(&t),
        "que(I, in1, 3) < 95",
        "-n",
        NARRATIVE,
        "--trace",
    ];
    let a = hsc(&[&["--format", "structured"][..], &args[..]].concat());
    let b = Command::new(env!("CARGO_BIN_EXE_hsc"))
        .args(args)
        .env("HSC_FORMAT", "structured")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(!records(&a).is_empty());
}

#[test]
fn batch_runs_in_parallel_with_serial_output() {
    let dir = Scratch::new("batch");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let mut lines = vec!["// queue bounds".to_string()];
    for (i, bound) in (50..100).step_by(5).enumerate() {
        if i % 3 == 0 {
            lines.push(format!("narrative: switch(I)@1; switch(I)@{}", 2 + i % 2));
        }
        lines.push(format!("que(I, in1, 4) < {bound}"));
    }
    let b = dir.file("queries.txt", &lines.join("\n"));
    let run = |jobs: &str| {
        hsc(&[
            "--format",
            "structured",
            "query",
            path(&t),
            "--batch",
            path(&b),
            "--jobs",
            jobs,
        ])
    };
    let (serial, parallel) = (run("1"), run("4"));
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(serial.status.code(), parallel.status.code());
    assert_eq!(
        records(&serial)
            .iter()
            .filter(|r| r["record"] == "verdict")
            .count(),
        10
    );
}

#[test]
fn diagnose_names_the_first_switch() {
    let dir = Scratch::new("diagnose");
    let t = dir.file("traffic.tbat", TRAFFIC);
    let o = hsc(&[
        "--format",
        "structured",
        "diagnose",
        path(&t),
        "que(I, in1, t) < 95",
        "-n",
        NARRATIVE,
        "--horizon",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = records(&o)
        .into_iter()
        .find(|r| r["record"] == "attribution")
        .unwrap();
    assert_eq!(a["kind"], "action");
    assert_eq!(a["action"], "switch(I, 1)");
    assert_eq!(a["elapsed"], "1/2");

    let never = hsc(&[
        "diagnose",
        path(&t),
        "que(I, in1, t) < 0",
        "-n",
        NARRATIVE,
        "--horizon",
        "3",
    ]);
    assert_eq!(never.status.code(), Some(1));
}

#[test]
fn hybrid_commands_report_trajectories() {
    let dir = Scratch::new("ha");
    let h = dir.file("bounce.ha", BOUNCE);
    let out = dir.0.join("bounce.tbat");
    let tr = hsc(&["ha", "translate", path(&h), "-o", path(&out)]);
    assert_eq!(tr.status.code(), Some(0), "{}", stderr(&tr));
    assert_eq!(hsc(&["check", path(&out)]).status.code(), Some(0));

    let legal = "trans(fall, fall, 0, 5, 1); trans(fall, fall, 0, 5/2, 2)";
    let ok = hsc(&[
        "--format",
        "structured",
        "ha",
        "trace",
        path(&h),
        "-n",
        legal,
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let segs = records(&ok)
        .into_iter()
        .filter(|r| r["record"] == "segment")
        .count();
    assert_eq!(segs, 3);

    let over = hsc(&["ha", "invariance", path(&h), "-n", legal, "--tau", "3"]);
    assert_eq!(over.status.code(), Some(1));
    assert!(stdout(&over).contains("(5/2, 3]"), "{}", stdout(&over));
}
