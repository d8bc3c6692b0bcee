//! The `.tbat` theory format: lexing, parsing, elaboration into a typed
//! [`Theory`], pretty-printing and validation.

pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod query;
pub mod theory;
pub mod validate;

pub use lexer::Span;
pub use parser::{parse_expr, parse_sections, ParseError};
pub use printer::print_theory;
pub use query::{parse_action, parse_narrative, parse_query};
pub use theory::{has_errors, Diagnostic, Severity, Theory};
pub use validate::validate_theory;

/// Parses and elaborates a source text without the semantic validation
/// pass. Any diagnostics returned alongside the theory are warnings.
pub fn parse_unvalidated(src: &str) -> Result<(Theory, Vec<Diagnostic>), Vec<Diagnostic>> {
    let sections = parse_sections(src)
        .map_err(|e| vec![Diagnostic::error("syntax", e.message, Some(e.span))])?;
    let (th, diags) = elaborate::elaborate(&sections);
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok((th, diags))
}

/// Parses, elaborates and validates a theory. On success the returned
/// diagnostics contain only warnings.
pub fn parse_theory(src: &str) -> Result<(Theory, Vec<Diagnostic>), Vec<Diagnostic>> {
    let (th, mut diags) = parse_unvalidated(src)?;
    diags.extend(validate_theory(&th));
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok((th, diags))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TRAFFIC: &str = include_str!("../../data/traffic.tbat");

    fn codes(src: &str) -> Vec<&'static str> {
        match parse_theory(src) {
            Ok((_, d)) => d.iter().map(|d| d.code).collect(),
            Err(d) => d.iter().filter(|d| d.is_error()).map(|d| d.code).collect(),
        }
    }

    #[test]
    fn traffic_loads_cleanly() {
        let (th, warnings) = parse_theory(TRAFFIC).unwrap_or_else(|d| {
            panic!(
                "{}",
                d.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join("\n")
            )
        });
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(th.actions.iter().filter(|a| !a.natural).count(), 1);
        assert_eq!(th.actions.iter().filter(|a| a.natural).count(), 1);
        assert_eq!(
            th.fluents
                .iter()
                .filter(|f| f.kind == theory::FluentKind::Rel)
                .count(),
            4
        );
        assert_eq!(th.temporal_fluents().count(), 1);
        assert_eq!(th.tcas.len(), 4);
    }

    #[test]
    fn print_then_parse_is_stable() {
        let (th, _) = parse_theory(TRAFFIC).unwrap();
        let printed = print_theory(&th);
        let (again, _) = parse_theory(&printed).unwrap_or_else(|d| panic!("{printed}\n{d:?}"));
        assert_eq!(th, again);
        assert_eq!(printed, print_theory(&again));
    }

    #[test]
    fn sorts_only_theory() {
        let (th, d) = parse_theory("sorts { a = { x, y }; } init { start = 0; }").unwrap();
        assert!(d.is_empty());
        assert!(th.fluents.is_empty());
    }

    #[test]
    fn context_mentioning_time_is_rejected() {
        let src = TRAFFIC.replace("when Red(i, r, s)", "when Red(i, r, s) & t > 0");
        let err = parse_theory(&src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.message.contains("context must be time-independent")),
            "{err:?}"
        );
    }

    #[test]
    fn double_valued_initial_function() {
        let src = TRAFFIC.replace(
            "que_init(I, in1) = 100;",
            "que_init(I, in1) = 100; que_init(I, in1, S0) = 90;",
        );
        let err = parse_theory(&src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.message.contains("functional fluent double-valued at S0")),
            "{err:?}"
        );
    }

    #[test]
    fn single_fault_mutations() {
        // An action without its time argument is not temporal.
        let no_time = TRAFFIC.replace(
            "Poss(switch(i, t), s) <-> start(s) <= t;",
            "Poss(switch(i), s) <-> true;",
        );
        assert!(codes(&no_time).contains(&"arity"));
        // A successor state axiom removed.
        let start = TRAFFIC.find("  RArr(i, r, do(a, s))").unwrap();
        let end = TRAFFIC[start..].find(";\n").unwrap() + start + 2;
        let no_ssa = format!("{}{}", &TRAFFIC[..start], &TRAFFIC[end..]);
        assert!(codes(&no_ssa).contains(&"missing-ssa"));
        // The init axiom of the temporal fluent removed.
        let start = TRAFFIC.find("init-ssa {").unwrap();
        let end = TRAFFIC[start..].find("\n}\n").unwrap() + start + 3;
        let no_init = format!("{}{}", &TRAFFIC[..start], &TRAFFIC[end..]);
        assert!(codes(&no_init).contains(&"missing-init-ssa"));
        // A precondition that is not uniform in its situation.
        let non_uniform = TRAFFIC.replace(
            "Poss(switch(i, t), s) <-> start(s) <= t;",
            "Poss(switch(i, t), s) <-> start(S0) <= t;",
        );
        assert!(codes(&non_uniform).contains(&"non-uniform"));
    }

    #[test]
    fn stratification_cycle_reported() {
        let src = "sorts { o = { c }; }
            actions { go; }
            fluents { temporal f; temporal g; }
            poss { Poss(go(t), s) <-> true; }
            init-ssa { f_init(do(a, s)) { } g_init(do(a, s)) { } }
            tca {
              f(t, s) = y when true then y = g(t, s);
              g(t, s) = y when true then y = f(t, s);
            }
            init { start = 0; f_init = 0; g_init = 0; }";
        let err = parse_theory(src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.message == "SEA stratification cycle f ≻ g ≻ f"),
            "{err:?}"
        );
    }

    #[test]
    fn contradiction_and_violated_constraint_have_witnesses() {
        let src = TRAFFIC.replace("Red(I, in1);", "Red(I, in1); !Red(I, in1);");
        let err = parse_theory(&src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.code == "contradiction" && d.message.contains("Red(I, in1)")),
            "{err:?}"
        );
        let src = TRAFFIC.replace("Red(I, in1);", "Red(I, in1); LArr(I, in1);");
        let err = parse_theory(&src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.code == "constraint-violated" && d.message.contains("r = in1")),
            "{err:?}"
        );
    }

    #[test]
    fn incomplete_initial_function() {
        let src = TRAFFIC.replace("que_init(I, in4) = 40;", "");
        let err = parse_theory(&src).unwrap_err();
        assert!(
            err.iter()
                .any(|d| d.code == "incomplete-init" && d.message.contains("que_init(I, in4)")),
            "{err:?}"
        );
    }
}
