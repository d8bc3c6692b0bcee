//! The `.ha` automaton format.
//!
//! ```text
//! automaton bounce;
//! vars h, v;
//! states fall;
//! flow fall { h = h + v * t - 5 * t * t; v = v - 10 * t; }
//! inv fall: h >= 0;
//! edge fall -> fall when h = 0 & v < 0 reset { v = -1/2 * v; }
//! init fall: h >= 0 & v = 0;
//! start fall { h = 5; v = 0; }
//! ```

use itertools::Itertools;

use super::{Edge, HybridAutomaton};
use crate::dsl::elaborate::{elaborate_polynomial, elaborate_term};
use crate::dsl::parse_expr;
use crate::dsl::theory::{Diagnostic, Theory};
use crate::logic::simplify::simplify_term;
use crate::logic::{Formula, Rat, Sort, Symbol, Term, Var};

struct Stmt {
    line: usize,
    head: String,
    block: Option<String>,
}

fn strip_comments(src: &str) -> String {
    src.lines()
        .map(|l| l.split_once("//").map_or(l, |(code, _)| code))
        .join("\n")
}

/// Splits into statements ending at `;` or at a closing brace.
fn statements(src: &str) -> Result<Vec<Stmt>, Diagnostic> {
    let mut out = Vec::new();
    let (mut line, mut start_line) = (1, 1);
    let mut head = String::new();
    let mut block: Option<String> = None;
    let mut depth = 0;
    let flush =
        |head: &mut String, block: &mut Option<String>, start_line: usize, out: &mut Vec<Stmt>| {
            if !head.trim().is_empty() || block.is_some() {
                out.push(Stmt {
                    line: start_line,
                    head: head.trim().to_string(),
                    block: block.take(),
                });
            }
            head.clear();
        };
    for c in src.chars() {
        if c == '\n' {
            line += 1;
        }
        match (c, depth) {
            ('{', 0) => {
                depth = 1;
                block = Some(String::new());
            }
            ('{', _) => return Err(syntax(line, "nested braces")),
            ('}', 1) => {
                depth = 0;
                flush(&mut head, &mut block, start_line, &mut out);
                start_line = line;
            }
            ('}', _) => return Err(syntax(line, "unmatched `}`")),
            (';', 0) => {
                flush(&mut head, &mut block, start_line, &mut out);
                start_line = line;
            }
            (_, 1) => block.as_mut().unwrap().push(c),
            _ => {
                if head.trim().is_empty() && !c.is_whitespace() {
                    start_line = line;
                }
                head.push(c)
            }
        }
    }
    if depth != 0 {
        return Err(syntax(line, "unclosed `{`"));
    }
    if !head.trim().is_empty() {
        return Err(syntax(start_line, "missing `;`"));
    }
    Ok(out)
}

fn syntax(line: usize, msg: impl std::fmt::Display) -> Diagnostic {
    Diagnostic::error("ha-syntax", format!("line {line}: {msg}"), None)
}

fn names(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `text` before the whole word `kw`, if present.
fn split_word<'a>(text: &'a str, kw: &str) -> (&'a str, Option<&'a str>) {
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(i) = text[from..].find(kw).map(|i| i + from) {
        let before = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'_');
        let j = i + kw.len();
        let after = j == text.len() || !(bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_');
        if before && after {
            return (&text[..i], Some(&text[j..]));
        }
        from = j;
    }
    (text, None)
}

struct Reader {
    vars: Vec<Var>,
    th: Theory,
}

impl Reader {
    fn scope(&self) -> Vec<Var> {
        self.vars
            .iter()
            .cloned()
            .chain([HybridAutomaton::elapsed()])
            .collect()
    }

    fn term(&self, line: usize, src: &str) -> Result<Term, Diagnostic> {
        let e = parse_expr(src).map_err(|e| syntax(line, e.message))?;
        let (t, sort) = elaborate_term(&self.th, &e, None, self.scope())
            .map_err(|d| syntax(line, d.message))?;
        if sort != Sort::Real {
            return Err(syntax(line, format!("`{src}` is not a real expression")));
        }
        Ok(t)
    }

    fn formula(&self, line: usize, src: &str) -> Result<Formula, Diagnostic> {
        let e = parse_expr(src).map_err(|e| syntax(line, e.message))?;
        elaborate_polynomial(&self.th, &e, self.scope()).map_err(|d| syntax(line, d.message))
    }

    /// `x = e; ...` into one term per coordinate, defaulting to `default`.
    fn assignments(
        &self,
        line: usize,
        block: &str,
        default: impl Fn(&Var) -> Term,
    ) -> Result<Vec<Term>, Diagnostic> {
        let mut out: Vec<Option<Term>> = vec![None; self.vars.len()];
        for a in block.split(';').map(str::trim).filter(|a| !a.is_empty()) {
            let (lhs, rhs) = a.split_once('=').ok_or_else(|| {
                syntax(line, format!("expected `name = expression`, found `{a}`"))
            })?;
            let lhs = lhs.trim();
            let k = self
                .vars
                .iter()
                .position(|v| v.name == lhs)
                .ok_or_else(|| syntax(line, format!("`{lhs}` is not a declared variable")))?;
            if out[k].is_some() {
                return Err(syntax(line, format!("`{lhs}` is assigned twice")));
            }
            out[k] = Some(self.term(line, rhs)?);
        }
        Ok(out
            .into_iter()
            .zip(&self.vars)
            .map(|(t, v)| t.unwrap_or_else(|| default(v)))
            .collect())
    }
}

/// Reads an automaton and runs its structural checks.
pub fn parse_ha(src: &str) -> Result<HybridAutomaton, Vec<Diagnostic>> {
    let stmts = statements(&strip_comments(src)).map_err(|d| vec![d])?;
    let mut r = Reader {
        vars: Vec::new(),
        th: Theory::default(),
    };
    let mut h = HybridAutomaton {
        name: String::new(),
        states: Vec::new(),
        vars: Vec::new(),
        flows: Vec::new(),
        invariants: Vec::new(),
        edges: Vec::new(),
        init: Vec::new(),
        start: (Symbol::new(""), Vec::new()),
    };
    let mut has_start = false;
    let mut errs = Vec::new();
    for s in stmts {
        let (kw, rest) = s
            .head
            .split_once(char::is_whitespace)
            .unwrap_or((s.head.as_str(), ""));
        let rest = rest.trim();
        let res: Result<(), Diagnostic> = (|| {
            let needs_block = matches!(kw, "flow" | "start");
            if needs_block != s.block.is_some() && kw != "edge" {
                return Err(syntax(
                    s.line,
                    format!(
                        "`{kw}` {} a `{{ ... }}` block",
                        if needs_block { "needs" } else { "takes no" }
                    ),
                ));
            }
            match kw {
                "automaton" => h.name = rest.to_string(),
                "vars" => {
                    for n in names(rest) {
                        if !is_ident(&n) {
                            return Err(syntax(s.line, format!("`{n}` is not a name")));
                        }
                        r.vars.push(Var::real(&n));
                    }
                    h.vars = r.vars.clone();
                }
                "states" => {
                    for n in names(rest) {
                        if !is_ident(&n) {
                            return Err(syntax(s.line, format!("`{n}` is not a name")));
                        }
                        h.states.push(Symbol::new(&n));
                    }
                }
                "flow" => {
                    let f = r.assignments(s.line, s.block.as_deref().unwrap(), Term::var)?;
                    h.flows.push((Symbol::new(rest), f));
                }
                "inv" | "init" => {
                    let (q, f) = match rest.split_once(':') {
                        Some((q, f)) => (q.trim(), r.formula(s.line, f)?),
                        None => (rest, Formula::True),
                    };
                    let entry = (Symbol::new(q), f);
                    if kw == "inv" {
                        h.invariants.push(entry);
                    } else {
                        h.init.push(entry);
                    }
                }
                "edge" => {
                    let (ends, tail) = split_word(rest, "when");
                    let (ends, guard, reset_kw) = match tail {
                        Some(t) => {
                            let (g, reset) = split_word(t, "reset");
                            (ends, r.formula(s.line, g)?, reset.is_some())
                        }
                        None => {
                            let (e, reset) = split_word(ends, "reset");
                            (e, Formula::True, reset.is_some())
                        }
                    };
                    if reset_kw != s.block.is_some() {
                        return Err(syntax(
                            s.line,
                            "`reset` must be followed by a `{ ... }` block",
                        ));
                    }
                    let (from, to) = ends
                        .split_once("->")
                        .ok_or_else(|| syntax(s.line, "expected `edge a -> b`"))?;
                    let reset =
                        r.assignments(s.line, s.block.as_deref().unwrap_or(""), Term::var)?;
                    h.edges.push(Edge {
                        from: Symbol::new(from.trim()),
                        to: Symbol::new(to.trim()),
                        guard,
                        reset,
                    });
                }
                "start" => {
                    let vals =
                        r.assignments(s.line, s.block.as_deref().unwrap(), |_| Term::int(0))?;
                    let vals: Result<Vec<Rat>, _> = vals
                        .iter()
                        .map(|t| match simplify_term(t) {
                            Term::Num(v) => Ok(v),
                            other => Err(syntax(
                                s.line,
                                format!("start value `{other}` is not a number"),
                            )),
                        })
                        .collect();
                    h.start = (Symbol::new(rest), vals?);
                    has_start = true;
                }
                other => return Err(syntax(s.line, format!("unknown statement `{other}`"))),
            }
            Ok(())
        })();
        if let Err(d) = res {
            errs.push(d);
        }
    }
    if !has_start {
        errs.push(Diagnostic::error(
            "start",
            "missing `start` statement",
            None,
        ));
    }
    errs.extend(h.validate());
    if errs.is_empty() {
        Ok(h)
    } else {
        Err(errs)
    }
}

/// Renders an automaton in the `.ha` format.
pub fn print_ha(h: &HybridAutomaton) -> String {
    let assigns = |ts: &[Term], skip: &dyn Fn(&Var, &Term) -> bool| {
        h.vars
            .iter()
            .zip(ts)
            .filter(|(v, t)| !skip(v, t))
            .map(|(v, t)| format!("{} = {t};", v.name))
            .join(" ")
    };
    let identity = |v: &Var, t: &Term| *t == Term::var(v);
    let mut out = Vec::new();
    if !h.name.is_empty() {
        out.push(format!("automaton {};", h.name));
    }
    out.push(format!(
        "vars {};",
        h.vars.iter().map(|v| v.name.to_string()).join(", ")
    ));
    out.push(format!("states {};", h.states.iter().join(", ")));
    for (q, f) in &h.flows {
        out.push(format!("flow {q} {{ {} }}", assigns(f, &identity)));
    }
    for (q, f) in &h.invariants {
        out.push(format!("inv {q}: {f};"));
    }
    for e in &h.edges {
        let mut line = format!("edge {} -> {}", e.from, e.to);
        if e.guard != Formula::True {
            line += &format!(" when {}", e.guard);
        }
        if e.reset.iter().zip(&h.vars).any(|(t, v)| !identity(v, t)) {
            line += &format!(" reset {{ {} }}", assigns(&e.reset, &identity));
        } else {
            line += ";";
        }
        out.push(line);
    }
    for (q, f) in &h.init {
        out.push(format!("init {q}: {f};"));
    }
    let (q0, x0) = &h.start;
    let vals: Vec<Term> = x0.iter().cloned().map(Term::Num).collect();
    out.push(format!(
        "start {q0} {{ {} }}",
        assigns(&vals, &|_, _| false)
    ));
    out.join("\n") + "\n"
}
