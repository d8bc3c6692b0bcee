//! Inline narratives (`switch(I)@1; switch(I)@2`) and query formulas.

use super::elaborate::{elaborate_formula, elaborate_term};
use super::parser::{parse_expr, Expr, ExprKind};
use super::theory::{Diagnostic, Theory};
use crate::logic::{parse_rat, Formula, Sort, Term, Var};

fn syntax(e: super::ParseError) -> Diagnostic {
    Diagnostic::error("syntax", e.message, Some(e.span))
}

/// One narrative entry. `A(args)@t` and `A(args, t)` denote the same
/// action; both forms may be combined when the times agree.
pub fn parse_action(th: &Theory, src: &str) -> Result<Term, Diagnostic> {
    let (body, at) = match src.rsplit_once('@') {
        Some((b, t)) => {
            let t = parse_rat(t.trim()).ok_or_else(|| {
                Diagnostic::error(
                    "narrative",
                    format!("`{}` is not a rational time", t.trim()),
                    None,
                )
            })?;
            (b.trim(), Some(t))
        }
        None => (src.trim(), None),
    };
    let mut e = parse_expr(body).map_err(syntax)?;
    let ExprKind::App(name, args) = &mut e.kind else {
        return Err(Diagnostic::error(
            "narrative",
            format!("`{body}` is not an action"),
            Some(e.span),
        ));
    };
    let decl = th.action(name).ok_or_else(|| {
        Diagnostic::error(
            "narrative",
            format!("unknown action `{name}`"),
            Some(e.span),
        )
    })?;
    if args.len() == decl.params.len() {
        let Some(t) = &at else {
            return Err(Diagnostic::error(
                "narrative",
                format!("`{body}` needs a time, as in `{body}@1`"),
                Some(e.span),
            ));
        };
        args.push(Expr {
            kind: ExprKind::Num(t.clone()),
            span: e.span,
        });
    }
    let (term, sort) = elaborate_term(th, &e, None, Vec::new())?;
    if sort != Sort::Action {
        return Err(Diagnostic::error(
            "narrative",
            format!("`{body}` is not an action"),
            Some(e.span),
        ));
    }
    let Term::Action { time, .. } = &term else {
        unreachable!("sort checked")
    };
    match (time.as_num(), &at) {
        (Some(t), Some(a)) if t != a => Err(Diagnostic::error(
            "narrative",
            format!("`{body}` is given two different times"),
            Some(e.span),
        )),
        (None, _) => Err(Diagnostic::error(
            "narrative",
            format!("time of `{body}` is not a number"),
            Some(e.span),
        )),
        _ => Ok(term),
    }
}

/// A `;`-separated sequence of ground timed actions; empty text is the
/// empty narrative.
pub fn parse_narrative(th: &Theory, src: &str) -> Result<Vec<Term>, Diagnostic> {
    src.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_action(th, s))
        .collect()
}

/// A query formula whose fluents default to situation `sit`. Variables in
/// `scope` may occur free.
pub fn parse_query(
    th: &Theory,
    src: &str,
    sit: Term,
    scope: Vec<Var>,
) -> Result<Formula, Diagnostic> {
    let e = parse_expr(src).map_err(syntax)?;
    elaborate_formula(th, &e, sit, scope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_theory;
    use crate::logic::rat;

    fn traffic() -> Theory {
        parse_theory(include_str!("../../data/traffic.tbat"))
            .unwrap()
            .0
    }

    #[test]
    fn both_time_notations() {
        let th = traffic();
        let a = parse_narrative(&th, "switch(I)@1; switch(I, 2)").unwrap();
        let b = parse_narrative(&th, "switch(I, 1)@1;switch(I)@2;").unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a[1],
            Term::action("switch", vec![Term::obj("I")], Term::Num(rat(2)))
        );
        assert!(parse_narrative(&th, "").unwrap().is_empty());
    }

    #[test]
    fn bad_entries() {
        let th = traffic();
        for src in [
            "switch(I)",
            "switch(I, 1)@2",
            "jump(I)@1",
            "switch(I)@x",
            "Green(I, in1)@1",
        ] {
            assert!(parse_narrative(&th, src).is_err(), "{src}");
        }
    }

    #[test]
    fn query_uses_the_given_situation() {
        let th = traffic();
        let sit = Term::do_(parse_action(&th, "switch(I)@1").unwrap(), Term::S0);
        let q = parse_query(&th, "que(I, in1, 3) < 95", sit.clone(), Vec::new()).unwrap();
        assert_eq!(q.to_string(), format!("que(I, in1, 3, {sit}) < 95"));
    }
}
