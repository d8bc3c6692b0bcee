//! The `hsc` command line: argument parsing, the commands, and their output
//! as records rendered either for people or as JSON lines.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::dsl::{parse_narrative, parse_query, Diagnostic, Severity};
use crate::error::{Error, Result};
use crate::eval::{check_executable, evaluate, evaluate_term};
use crate::hybrid::{self, HybridAutomaton};
use crate::logic::{format_rat, parse_rat, Formula, Rat, Term, Var};
use crate::regression::{diagnose, Attribution, Mode, Regressor, Rule};
use crate::sea::{compile_source, Compiled};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Structured,
}

#[derive(Debug, Parser)]
#[command(
    name = "hsc",
    version,
    about = "Temporal action theories, regression and hybrid automata"
)]
pub struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        value_enum,
        env = "HSC_FORMAT",
        default_value = "human"
    )]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, validate, compile and consistency-check a theory.
    Check { theory: PathBuf },
    /// Print the compiled evolution and init successor state axioms.
    Compile { theory: PathBuf },
    /// Decide a query about the situation reached by a narrative.
    Query(QueryArgs),
    /// Find the action responsible for a query becoming true.
    Diagnose(DiagnoseArgs),
    /// Hybrid automata.
    Ha {
        #[command(subcommand)]
        command: HaCommand,
    },
}

#[derive(Debug, clap::Args)]
pub struct QueryArgs {
    pub theory: PathBuf,
    /// Query formula; fluents without a situation refer to the end of the
    /// narrative.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    pub query: Option<String>,
    /// `A(args)@t; B(args)@t; ...`
    #[arg(long, short, default_value = "")]
    pub narrative: String,
    /// Print every regression step.
    #[arg(long)]
    pub trace: bool,
    /// Regress only back to the prefix with this many actions first.
    #[arg(long)]
    pub stop_at: Option<usize>,
    /// Keep every branch of the evolution axioms instead of deciding
    /// contexts in the initial theory.
    #[arg(long)]
    pub symbolic: bool,
    /// File of queries, one per line; a line `narrative: ...` sets the
    /// narrative for the lines after it.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Worker threads for `--batch`.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, clap::Args)]
pub struct DiagnoseArgs {
    pub theory: PathBuf,
    /// Query formula, free in the time variable `t`.
    pub query: String,
    #[arg(long, short, default_value = "")]
    pub narrative: String,
    /// End of the last interval; defaults to the last action time.
    #[arg(long)]
    pub horizon: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum HaCommand {
    /// Print the action theory encoding an automaton.
    Translate {
        automaton: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Build the trajectory of a narrative and check it against the automaton.
    Trace(HaRunArgs),
    /// Check the invariants along a narrative by regression.
    Invariance(HaRunArgs),
}

#[derive(Debug, clap::Args)]
pub struct HaRunArgs {
    pub automaton: PathBuf,
    /// `trans(q1, q2, y.., t); ...` or `trans(q1, q2, y..)@t; ...`
    #[arg(long, short, default_value = "")]
    pub narrative: String,
    /// End time; defaults to the last action time.
    #[arg(long)]
    pub tau: Option<String>,
}

/// One unit of output. Structured mode prints each as a JSON object on its
/// own line, tagged by `record`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum Record {
    Diagnostic {
        severity: Severity,
        code: String,
        message: String,
        location: Option<String>,
    },
    Sea {
        fluent: String,
        disjuncts: usize,
        text: String,
    },
    InitSsa {
        fluent: String,
        text: String,
    },
    Regressed {
        stage: String,
        formula: String,
    },
    Step {
        rule: Rule,
        depth: usize,
        before: String,
        after: String,
        note: Option<String>,
    },
    Value {
        term: String,
        value: String,
    },
    Verdict {
        query: String,
        holds: bool,
    },
    Prefix {
        index: usize,
        action: Option<String>,
        start: String,
        end: String,
        holds: String,
        at_end: bool,
        throughout: bool,
    },
    Attribution {
        kind: String,
        index: Option<usize>,
        action: Option<String>,
        elapsed: Option<String>,
        attained: Option<bool>,
    },
    Tbat {
        text: String,
    },
    Segment {
        index: usize,
        duration: String,
        state: String,
        entry: Vec<String>,
    },
    Violation {
        condition: char,
        index: usize,
        detail: String,
    },
    Trajectory {
        valid: bool,
    },
    Invariance {
        initial: bool,
        holds: bool,
        prefix: Option<usize>,
        times: Option<String>,
    },
    Result {
        command: String,
        ok: bool,
    },
    Error {
        exit: u8,
        message: String,
    },
}

impl From<&Diagnostic> for Record {
    fn from(d: &Diagnostic) -> Self {
        Record::Diagnostic {
            severity: d.severity,
            code: d.code.to_string(),
            message: d.message.clone(),
            location: d.span.map(|s| s.to_string()),
        }
    }
}

impl Record {
    /// Records people expect on standard error.
    pub fn is_error_stream(&self) -> bool {
        matches!(self, Record::Diagnostic { .. } | Record::Error { .. })
    }

    pub fn human(&self) -> String {
        let indent = |s: &str| s.lines().map(|l| format!("  {l}")).join("\n");
        match self {
            Record::Diagnostic {
                severity,
                code,
                message,
                location,
            } => {
                let sev = match severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                match location {
                    Some(l) => format!("{l}: {sev}[{code}]: {message}"),
                    None => format!("{sev}[{code}]: {message}"),
                }
            }
            Record::Sea { text, .. } => format!("sea {{\n{}\n}}", indent(text)),
            Record::InitSsa { text, .. } => format!("init-ssa {{\n{}\n}}", indent(text)),
            Record::Regressed { stage, formula } => format!("{stage}: {formula}"),
            Record::Step {
                rule,
                depth,
                after,
                note,
                ..
            } => {
                let note = note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default();
                format!("  {rule} [depth {depth}]{note}: {after}")
            }
            Record::Value { term, value } => format!("value: {term} = {value}"),
            Record::Verdict { holds, .. } => holds.to_string(),
            Record::Prefix {
                index,
                action,
                start,
                end,
                holds,
                ..
            } => {
                let after = action.as_deref().unwrap_or("S0");
                format!("prefix {index} ({after}) on [{start}, {end}]: holds on {holds}")
            }
            Record::Attribution {
                kind,
                action,
                elapsed,
                attained,
                index,
            } => match kind.as_str() {
                "initially-true" => "initially true".into(),
                "never-true" => "false at all prefixes".into(),
                "false-at-horizon" => "false at the horizon".into(),
                _ => {
                    let who = action.clone().unwrap_or_else(|| {
                        format!("passage of time in prefix {}", index.unwrap_or(0))
                    });
                    let open = if *attained == Some(false) {
                        " (true just after)"
                    } else {
                        ""
                    };
                    format!(
                        "responsible: {who}; elapsed: {}{open}",
                        elapsed.as_deref().unwrap_or("?")
                    )
                }
            },
            Record::Tbat { text } => text.trim_end().to_string(),
            Record::Segment {
                index,
                duration,
                state,
                entry,
            } => {
                format!(
                    "{index}: delta = {duration}, q = {state}, entry = ({})",
                    entry.join(", ")
                )
            }
            Record::Violation {
                condition,
                index,
                detail,
            } => {
                format!("violation: condition ({condition}) at segment {index}: {detail}")
            }
            Record::Trajectory { valid } => if *valid {
                "trajectory valid"
            } else {
                "trajectory invalid"
            }
            .into(),
            Record::Invariance {
                initial,
                holds,
                prefix,
                times,
            } => match (holds, initial, prefix) {
                (true, _, _) => "invariant holds".into(),
                (false, false, _) => "initial condition fails".into(),
                (false, true, p) => format!(
                    "invariant violated in prefix {} at times {}",
                    p.unwrap_or(0),
                    times.as_deref().unwrap_or("?")
                ),
            },
            Record::Result { command, ok } => {
                format!("{command}: {}", if *ok { "ok" } else { "failed" })
            }
            Record::Error { message, .. } => format!("error: {message}"),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_ha(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "ha")
}

fn load_ha(path: &Path) -> Result<(HybridAutomaton, Compiled)> {
    let h = hybrid::parse_ha(&read(path)?).map_err(Error::Rejected)?;
    let c = hybrid::translate(&h).map_err(Error::Rejected)?;
    Ok((h, c))
}

/// Reads and compiles a `.tbat` theory, or the encoding of a `.ha`
/// automaton.
pub fn load(path: &Path) -> Result<Compiled> {
    if is_ha(path) {
        return load_ha(path).map(|(_, c)| c);
    }
    compile_source(&read(path)?).map_err(Error::Rejected)
}

fn rat_arg(flag: &str, s: &str) -> Result<Rat> {
    parse_rat(s).ok_or_else(|| Error::Usage(format!("--{flag}: `{s}` is not a rational number")))
}

fn narrative(c: &Compiled, src: &str) -> Result<Vec<Term>> {
    parse_narrative(&c.theory, src).map_err(|d| Error::Usage(format!("narrative: {}", d.message)))
}

fn warn_executability(c: &Compiled, n: &[Term], out: &mut Vec<Record>) {
    out.extend(check_executable(n, c).diagnostics.iter().map(Record::from));
}

fn last_time(n: &[Term], c: &Compiled) -> Rat {
    match n.last() {
        Some(Term::Action { time, .. }) => time
            .as_num()
            .cloned()
            .unwrap_or_else(|| c.model.start.clone()),
        _ => c.model.start.clone(),
    }
}

fn cmd_check(path: &Path, out: &mut Vec<Record>) -> Result<bool> {
    let c = load(path)?;
    out.extend(c.warnings.iter().map(Record::from));
    out.push(Record::Result {
        command: "check".into(),
        ok: true,
    });
    Ok(true)
}

fn cmd_compile(path: &Path, out: &mut Vec<Record>) -> Result<bool> {
    let c = load(path)?;
    out.extend(c.warnings.iter().map(Record::from));
    for s in &c.seas {
        out.push(Record::Sea {
            fluent: s.fluent.to_string(),
            disjuncts: s.disjuncts(),
            text: s.to_string(),
        });
    }
    for s in &c.init_ssas {
        out.push(Record::InitSsa {
            fluent: s.fluent.to_string(),
            text: s.to_string(),
        });
    }
    Ok(true)
}

pub struct QueryOptions {
    pub trace: bool,
    pub stop_at: Option<usize>,
    pub mode: Mode,
}

fn values(f: &Formula, c: &Compiled) -> Vec<Record> {
    let mut terms = Vec::new();
    f.visit_atoms(&mut |a| {
        if let Formula::Cmp(_, l, r) = a {
            terms.extend([l, r].into_iter().filter(|t| t.as_num().is_none()).cloned());
        }
    });
    terms
        .into_iter()
        .unique()
        .filter_map(|t| {
            let v = evaluate_term(&t, &c.model).ok()?;
            Some(Record::Value {
                term: t.to_string(),
                value: format_rat(&v),
            })
        })
        .collect()
}

/// Regresses `src` over the narrative and evaluates the result.
pub fn query_one(
    c: &Compiled,
    n: &[Term],
    src: &str,
    opts: &QueryOptions,
) -> Result<(Vec<Record>, bool)> {
    let mut out = Vec::new();
    let sit = Term::do_seq(n.iter().cloned());
    let w = parse_query(&c.theory, src, sit, Vec::new())
        .map_err(|d| Error::Usage(format!("query: {}", d.message)))?;
    let regressor = Regressor::new(c).mode(opts.mode);
    let mut trace = Vec::new();
    let w = match opts.stop_at {
        Some(k) if k > n.len() => {
            return Err(Error::Usage(format!(
                "--stop-at {k}: the narrative has {} actions",
                n.len()
            )));
        }
        Some(k) => {
            let p = regressor
                .regress_to(&w, &Term::do_seq(n[..k].iter().cloned()))
                .map_err(Error::engine)?;
            out.push(Record::Regressed {
                stage: format!("regressed to prefix {k}"),
                formula: p.formula.to_string(),
            });
            trace.extend(p.trace);
            p.formula
        }
        None => w,
    };
    let r = regressor.regress(&w).map_err(Error::engine)?;
    trace.extend(r.trace);
    if opts.trace {
        out.extend(trace.into_iter().map(|s| Record::Step {
            rule: s.rule,
            depth: s.depth,
            before: s.before.to_string(),
            after: s.after.to_string(),
            note: s.note,
        }));
    }
    out.push(Record::Regressed {
        stage: "regressed".into(),
        formula: r.formula.to_string(),
    });
    out.extend(values(&r.formula, c));
    let holds = evaluate(&r.formula, &c.model).map_err(Error::engine)?;
    out.push(Record::Verdict {
        query: src.trim().to_string(),
        holds,
    });
    Ok((out, holds))
}

enum BatchItem {
    Query { narrative: String, query: String },
}

fn batch_items(src: &str) -> Vec<BatchItem> {
    let mut current = String::new();
    let mut items = Vec::new();
    for line in src
        .lines()
        .map(|l| l.split_once("//").map_or(l, |(code, _)| code).trim())
    {
        if line.is_empty() {
            continue;
        }
        match line.strip_prefix("narrative:") {
            Some(n) => current = n.trim().to_string(),
            None => items.push(BatchItem::Query {
                narrative: current.clone(),
                query: line.to_string(),
            }),
        }
    }
    items
}

fn cmd_query(a: &QueryArgs, out: &mut Vec<Record>) -> Result<bool> {
    let c = load(&a.theory)?;
    let opts = QueryOptions {
        trace: a.trace,
        stop_at: a.stop_at,
        mode: if a.symbolic {
            Mode::Symbolic
        } else {
            Mode::Resolve
        },
    };
    let Some(batch) = &a.batch else {
        let n = narrative(&c, &a.narrative)?;
        warn_executability(&c, &n, out);
        let (records, holds) = query_one(&c, &n, a.query.as_deref().unwrap_or_default(), &opts)?;
        out.extend(records);
        return Ok(holds);
    };
    let items = batch_items(&read(batch)?);
    let run = |item: &BatchItem| -> Result<(Vec<Record>, bool)> {
        let BatchItem::Query {
            narrative: ns,
            query,
        } = item;
        let n = narrative(&c, ns)?;
        query_one(&c, &n, query, &opts)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("--jobs: {e}")))?;
    let results: Vec<Result<(Vec<Record>, bool)>> =
        pool.install(|| items.par_iter().map(run).collect());
    let mut all = true;
    for r in results {
        match r {
            Ok((records, holds)) => {
                out.extend(records);
                all &= holds;
            }
            Err(e) => {
                out.push(Record::Error {
                    exit: e.exit_code(),
                    message: e.to_string(),
                });
                all = false;
            }
        }
    }
    Ok(all)
}

fn cmd_diagnose(a: &DiagnoseArgs, out: &mut Vec<Record>) -> Result<bool> {
    let c = load(&a.theory)?;
    let n = narrative(&c, &a.narrative)?;
    warn_executability(&c, &n, out);
    let horizon = a
        .horizon
        .as_deref()
        .map(|h| rat_arg("horizon", h))
        .transpose()?;
    let (t, s) = (Var::real("t"), Var::sit("s"));
    let w = parse_query(
        &c.theory,
        &a.query,
        Term::var(&s),
        vec![t.clone(), s.clone()],
    )
    .map_err(|d| Error::Usage(format!("query: {}", d.message)))?;
    let report = diagnose(&w, &t, &s, &n, horizon, &c).map_err(Error::engine)?;
    for (j, p) in report.prefixes.iter().enumerate() {
        out.push(Record::Prefix {
            index: j,
            action: p.action.as_ref().map(Term::to_string),
            start: format_rat(&p.start),
            end: format_rat(&p.end),
            holds: p.holds.to_string(),
            at_end: p.at_end,
            throughout: p.throughout,
        });
    }
    let plain = |kind: &str| Record::Attribution {
        kind: kind.into(),
        index: None,
        action: None,
        elapsed: None,
        attained: None,
    };
    let (record, ok) = match &report.attribution {
        Attribution::InitiallyTrue => (plain("initially-true"), true),
        Attribution::NeverTrue => (plain("never-true"), false),
        Attribution::FalseAtHorizon => (plain("false-at-horizon"), false),
        Attribution::Action {
            index,
            action,
            elapsed,
            attained,
        } => (
            Record::Attribution {
                kind: "action".into(),
                index: Some(*index),
                action: action.as_ref().map(Term::to_string),
                elapsed: Some(format_rat(elapsed)),
                attained: Some(*attained),
            },
            true,
        ),
    };
    out.push(record);
    Ok(ok)
}

fn ha_run(a: &HaRunArgs) -> Result<(HybridAutomaton, Compiled, Vec<Term>, Rat)> {
    let (h, c) = load_ha(&a.automaton)?;
    let n = narrative(&c, &a.narrative)?;
    let tau = match &a.tau {
        Some(s) => rat_arg("tau", s)?,
        None => last_time(&n, &c),
    };
    Ok((h, c, n, tau))
}

fn cmd_ha(cmd: &HaCommand, out: &mut Vec<Record>) -> Result<bool> {
    match cmd {
        HaCommand::Translate { automaton, output } => {
            let h = hybrid::parse_ha(&read(automaton)?).map_err(Error::Rejected)?;
            let text = hybrid::ha_to_tbat(&h);
            match output {
                Some(p) => std::fs::write(p, &text).map_err(|source| Error::Io {
                    path: p.clone(),
                    source,
                })?,
                None => out.push(Record::Tbat { text }),
            }
            Ok(true)
        }
        HaCommand::Trace(a) => {
            let (h, c, n, tau) = ha_run(a)?;
            warn_executability(&c, &n, out);
            let eta = hybrid::build_trajectory(&h, &c, &n, &tau).map_err(Error::engine)?;
            for (i, s) in eta.segments.iter().enumerate() {
                out.push(Record::Segment {
                    index: i + 1,
                    duration: s.duration.to_string(),
                    state: s.state.to_string(),
                    entry: s.entry.iter().map(format_rat).collect(),
                });
            }
            let verdict = hybrid::check_trajectory(&h, &eta);
            if let Err(v) = &verdict {
                out.push(Record::Violation {
                    condition: v.condition.label(),
                    index: v.index + 1,
                    detail: v.detail.clone(),
                });
            }
            out.push(Record::Trajectory {
                valid: verdict.is_ok(),
            });
            Ok(verdict.is_ok())
        }
        HaCommand::Invariance(a) => {
            let (h, c, n, tau) = ha_run(a)?;
            warn_executability(&c, &n, out);
            let rep = hybrid::check_invariance(&h, &c, &n, &tau).map_err(Error::engine)?;
            out.push(Record::Invariance {
                initial: rep.initial,
                holds: rep.holds(),
                prefix: rep.violation.as_ref().map(|v| v.0),
                times: rep.violation.as_ref().map(|v| v.1.to_string()),
            });
            Ok(rep.holds())
        }
    }
}

/// Runs a parsed command line, collecting its records; returns the exit
/// status.
pub fn run(cli: &Cli, out: &mut Vec<Record>) -> u8 {
    let res = match &cli.command {
        Command::Check { theory } => cmd_check(theory, out),
        Command::Compile { theory } => cmd_compile(theory, out),
        Command::Query(a) => cmd_query(a, out),
        Command::Diagnose(a) => cmd_diagnose(a, out),
        Command::Ha { command } => cmd_ha(command, out),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            if let Error::Rejected(diags) = &e {
                out.extend(diags.iter().map(Record::from));
            }
            let exit = e.exit_code();
            out.push(Record::Error {
                exit,
                message: e.to_string(),
            });
            exit
        }
    }
}

/// Writes records in the chosen format. In human mode diagnostics and
/// errors go to `err`.
pub fn render(
    records: &[Record],
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> std::io::Result<()> {
    for r in records {
        match format {
            Format::Structured => writeln!(
                out,
                "{}",
                serde_json::to_string(r).expect("records serialize")
            )?,
            Format::Human if r.is_error_stream() => writeln!(err, "{}", r.human())?,
            Format::Human => writeln!(out, "{}", r.human())?,
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and writes its output; returns the exit
/// status. Usage errors from argument parsing exit with 2.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let mut records = Vec::new();
    let code = run(&cli, &mut records);
    if render(&records, cli.format, out, err).is_err() {
        return 2;
    }
    code
}
