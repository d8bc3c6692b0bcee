//! Syntactic classification: uniform formulas and regressable formulas.

use super::formula::Formula;
use super::symbol::Symbol;
use super::term::{Sort, Term};

fn is_situation_term(t: &Term) -> bool {
    matches!(t, Term::S0 | Term::Do(..)) || matches!(t, Term::Var(v) if v.sort == Sort::Situation)
}

/// Walks the maximal situation terms of `t`, calling `check` on each one.
fn situations_ok(t: &Term, check: &mut impl FnMut(&Term) -> bool) -> bool {
    if is_situation_term(t) {
        return check(t);
    }
    match t {
        Term::Fluent(_, args, s) => args.iter().all(|a| situations_ok(a, check)) && check(s),
        Term::Temporal(_, args, time, s) => {
            args.iter().all(|a| situations_ok(a, check)) && situations_ok(time, check) && check(s)
        }
        Term::Start(s) => check(s),
        _ => t.children().into_iter().all(|c| situations_ok(c, check)),
    }
}

fn atom_situations_ok(f: &Formula, check: &mut impl FnMut(&Term) -> bool) -> bool {
    match f {
        Formula::Rel(_, args, s) => args.iter().all(|a| situations_ok(a, check)) && check(s),
        Formula::Eq(a, b) if is_situation_term(a) || is_situation_term(b) => false,
        Formula::Precedes(..) => false,
        _ => f.atom_terms().into_iter().all(|t| situations_ok(t, check)),
    }
}

fn quantifies_situation(f: &Formula) -> bool {
    let mut found = false;
    f.visit_binders(&mut |v| found |= v.sort == Sort::Situation);
    found
}

/// True iff `phi` mentions no `Poss`, no situation ordering or equality,
/// quantifies over no situation, and has no situation term other than `s`.
pub fn is_uniform_in(phi: &Formula, s: &Term) -> bool {
    if quantifies_situation(phi) {
        return false;
    }
    let mut ok = true;
    phi.visit_atoms(&mut |a| {
        if !ok {
            return;
        }
        ok = match a {
            Formula::Poss(..) => false,
            _ => atom_situations_ok(a, &mut |sit| sit == s),
        };
    });
    ok
}

/// Ground `do([α1..αn], S0)` whose actions are all action-function terms.
pub fn is_ground_narrative(t: &Term) -> bool {
    match t.situation_actions() {
        Some(acts) => acts
            .iter()
            .all(|a| matches!(a, Term::Action { .. }) && a.is_ground()),
        None => false,
    }
}

/// Regressability with every action functor considered known.
pub fn is_regressable(phi: &Formula) -> bool {
    is_regressable_with(phi, &|_| true)
}

/// True iff every situation term is a ground do-chain rooted at `S0`, no
/// situation ordering/equality or situation quantifier appears, and every
/// `Poss` atom applies to an action term with a known functor.
pub fn is_regressable_with(phi: &Formula, known_action: &dyn Fn(&Symbol) -> bool) -> bool {
    if quantifies_situation(phi) {
        return false;
    }
    let mut ok = true;
    phi.visit_atoms(&mut |a| {
        if !ok {
            return;
        }
        ok = match a {
            Formula::Poss(act, s) => {
                let act_ok = match act {
                    Term::Action {
                        functor,
                        args,
                        time,
                    } => {
                        known_action(functor)
                            && args
                                .iter()
                                .all(|x| situations_ok(x, &mut is_ground_narrative))
                            && situations_ok(time, &mut is_ground_narrative)
                    }
                    _ => false,
                };
                act_ok && is_ground_narrative(s)
            }
            _ => atom_situations_ok(a, &mut is_ground_narrative),
        };
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::term::Var;

    fn red(s: Term) -> Formula {
        Formula::rel("Red", vec![Term::obj("I"), Term::obj("in1")], s)
    }

    fn sw(t: i64) -> Term {
        Term::action("switch", vec![Term::obj("I")], Term::int(t))
    }

    #[test]
    fn uniform_examples() {
        let s = Term::Var(Var::sit("s"));
        assert!(is_uniform_in(&red(s.clone()), &s));
        let a = Term::Var(Var::action("a"));
        assert!(!is_uniform_in(&Formula::poss(a.clone(), s.clone()), &s));
        let q = Term::temporal(
            "que",
            vec![Term::obj("I"), Term::obj("in1")],
            Term::Var(Var::real("t")),
            Term::do_(a, s.clone()),
        );
        assert!(!is_uniform_in(
            &Formula::eq(q, Term::Var(Var::real("y"))),
            &s
        ));
    }

    #[test]
    fn regressable_examples() {
        let sigma = Term::do_(sw(1), Term::S0);
        let q = Term::temporal(
            "que",
            vec![Term::obj("I"), Term::obj("in1")],
            Term::int(3),
            sigma,
        );
        assert!(is_regressable(&Formula::lt(q, Term::int(95))));

        let sp = Var::sit("s'");
        let prec = Formula::exists(
            sp.clone(),
            Formula::Precedes(Term::Var(sp), Term::do_(sw(1), Term::S0)),
        );
        assert!(!is_regressable(&prec));

        let a = Term::Var(Var::action("a"));
        assert!(!is_regressable(&Formula::poss(a, Term::S0)));
        assert!(is_regressable(&Formula::poss(sw(2), Term::S0)));
        assert!(!is_regressable_with(
            &Formula::poss(sw(2), Term::S0),
            &|f| f != "switch"
        ));
    }

    #[test]
    fn start_of_do_is_regressable_but_not_uniform() {
        let f = Formula::le(Term::start(Term::do_(sw(1), Term::S0)), Term::int(2));
        assert!(is_regressable(&f));
        assert!(!is_uniform_in(&f, &Term::S0));
    }
}
