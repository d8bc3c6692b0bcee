//! Rendering of terms and formulas in the concrete syntax of the theory
//! format, so that printed formulas can be parsed back.

use std::fmt::{self, Display, Formatter, Write};

use num_traits::{Signed, Zero};

use super::formula::{CmpOp, Formula};
use super::rational::format_rat;
use super::term::{ArithOp, Term, Var};

impl Display for Var {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn term_prec(t: &Term) -> u8 {
    match t {
        Term::Arith(ArithOp::Add | ArithOp::Sub, ..) => 1,
        Term::Arith(ArithOp::Mul, ..) => 2,
        _ => 3,
    }
}

fn write_args(f: &mut Formatter<'_>, args: &[&Term]) -> fmt::Result {
    f.write_char('(')?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_char(')')
}

fn write_operand(f: &mut Formatter<'_>, t: &Term, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({t})")
    } else {
        write!(f, "{t}")
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Obj(n) => f.write_str(n),
            Term::Num(r) => {
                if r.is_integer() && !r.is_negative() || r.is_zero() {
                    f.write_str(&format_rat(r))
                } else {
                    write!(f, "({})", format_rat(r))
                }
            }
            Term::Action {
                functor,
                args,
                time,
            } => {
                f.write_str(functor)?;
                let all: Vec<&Term> = args.iter().chain(std::iter::once(&**time)).collect();
                write_args(f, &all)
            }
            Term::S0 => f.write_str("S0"),
            Term::Do(a, s) => write!(f, "do({a}, {s})"),
            Term::Start(s) => write!(f, "start({s})"),
            Term::Time(a) => write!(f, "time({a})"),
            Term::Static(n, args) => {
                f.write_str(n)?;
                if args.is_empty() {
                    return Ok(());
                }
                write_args(f, &args.iter().collect::<Vec<_>>())
            }
            Term::Fluent(n, args, s) => {
                f.write_str(n)?;
                let all: Vec<&Term> = args.iter().chain(std::iter::once(&**s)).collect();
                write_args(f, &all)
            }
            Term::Temporal(n, args, t, s) => {
                f.write_str(n)?;
                let all: Vec<&Term> = args.iter().chain([&**t, &**s]).collect();
                write_args(f, &all)
            }
            Term::Arith(op, a, b) => {
                let p = term_prec(self);
                write_operand(f, a, term_prec(a) < p)?;
                f.write_str(match op {
                    ArithOp::Add => " + ",
                    ArithOp::Sub => " - ",
                    ArithOp::Mul => " * ",
                })?;
                write_operand(f, b, term_prec(b) <= p)
            }
        }
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(_) => 3,
        Formula::And(_) => 4,
        Formula::Not(_) => 5,
        Formula::Exists(..) | Formula::Forall(..) => 0,
        _ => 6,
    }
}

fn write_sub(f: &mut Formatter<'_>, g: &Formula, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let p = formula_prec(self);
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Cmp(CmpOp::Lt, a, b) => write!(f, "{a} < {b}"),
            Formula::Cmp(CmpOp::Le, a, b) => write!(f, "{a} <= {b}"),
            Formula::Rel(n, args, s) => {
                f.write_str(n)?;
                let all: Vec<&Term> = args.iter().chain(std::iter::once(s)).collect();
                write_args(f, &all)
            }
            Formula::Pred(n, args) => {
                f.write_str(n)?;
                if args.is_empty() {
                    return Ok(());
                }
                write_args(f, &args.iter().collect::<Vec<_>>())
            }
            Formula::Poss(a, s) => write!(f, "Poss({a}, {s})"),
            Formula::Precedes(a, b) => write!(f, "{a} <<= {b}"),
            Formula::Not(g) => match &**g {
                Formula::Eq(a, b) => write!(f, "{a} != {b}"),
                _ => {
                    f.write_char('!')?;
                    write_sub(f, g, formula_prec(g) < p)
                }
            },
            Formula::And(fs) | Formula::Or(fs) => {
                let sep = if matches!(self, Formula::And(_)) {
                    " & "
                } else {
                    " | "
                };
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_sub(f, g, formula_prec(g) <= p)?;
                }
                Ok(())
            }
            Formula::Implies(a, b) => {
                write_sub(f, a, formula_prec(a) <= p)?;
                f.write_str(" -> ")?;
                write_sub(f, b, formula_prec(b) < p)
            }
            Formula::Iff(a, b) => {
                write_sub(f, a, formula_prec(a) <= p)?;
                f.write_str(" <-> ")?;
                write_sub(f, b, formula_prec(b) <= p)
            }
            Formula::Exists(..) | Formula::Forall(..) => {
                let exists = matches!(self, Formula::Exists(..));
                f.write_str(if exists { "exists " } else { "forall " })?;
                // Collapse a run of the same quantifier into one binder list.
                let mut cur = self;
                let mut first = true;
                loop {
                    match (cur, exists) {
                        (Formula::Exists(v, body), true) | (Formula::Forall(v, body), false) => {
                            if !first {
                                f.write_str(", ")?;
                            }
                            write!(f, "{}: {}", v.name, v.sort)?;
                            first = false;
                            cur = body;
                        }
                        _ => break,
                    }
                }
                write!(f, ". {cur}")
            }
        }
    }
}

/// Renders a formula over several lines, one top-level disjunct or
/// conjunct per line, for human-readable output of large axioms.
pub fn render_block(f: &Formula, indent: usize) -> String {
    let pad = " ".repeat(indent);
    match f {
        Formula::Or(fs) if fs.len() > 1 => fs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let body = if formula_prec(g) <= 3 {
                    format!("({g})")
                } else {
                    g.to_string()
                };
                if i == 0 {
                    format!("{pad}  {body}")
                } else {
                    format!("{pad}| {body}")
                }
            })
            .collect::<Vec<_>>()
            .join("\n"),
        _ => format!("{pad}{f}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::rational::ratio;
    use crate::logic::term::Sort;

    #[test]
    fn arithmetic_parenthesization() {
        let a = Term::int(100);
        let e = Term::sub(
            Term::sub(a, Term::int(10)),
            Term::mul(Term::add(Term::int(15), Term::int(5)), Term::int(1)),
        );
        assert_eq!(e.to_string(), "100 - 10 - (15 + 5) * 1");
        let r = Term::sub(Term::int(1), Term::sub(Term::int(2), Term::int(3)));
        assert_eq!(r.to_string(), "1 - (2 - 3)");
        assert_eq!(Term::num(ratio(7, 2)).to_string(), "(7/2)");
        assert_eq!(Term::int(-5).to_string(), "(-5)");
    }

    #[test]
    fn formula_rendering() {
        let s = Var::sit("s");
        let red = Formula::rel("Red", vec![Term::obj("I"), Term::obj("in1")], Term::var(&s));
        let y = Var::real("y");
        let f = Formula::exists(
            y.clone(),
            Formula::and(vec![
                Formula::or(vec![red.clone(), Formula::not(red.clone())]),
                Formula::ne(Term::var(&y), Term::int(0)),
            ]),
        );
        assert_eq!(
            f.to_string(),
            "exists y: real. (Red(I, in1, s) | !Red(I, in1, s)) & y != 0"
        );
        let r = Var::new("r", Sort::object("lane"));
        let g = Formula::forall(r.clone(), Formula::exists(y, Formula::True));
        assert_eq!(g.to_string(), "forall r: lane. exists y: real. true");
        let imp = Formula::implies(
            Formula::implies(Formula::True, Formula::False),
            Formula::True,
        );
        assert_eq!(imp.to_string(), "(true -> false) -> true");
    }
}
