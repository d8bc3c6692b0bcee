//! Satisfiability of formulas mixing propositional atoms and linear real
//! arithmetic: case splitting on the opaque atoms, then linear quantifier
//! elimination at the leaves.

use std::collections::{BTreeMap, BTreeSet};

use super::qe::{Lra, QeError};
use crate::logic::{simplify, Formula, Rat, Term, Var};

/// A satisfying assignment: truth values of opaque atoms, values of the
/// arithmetic unknowns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Witness {
    pub atoms: Vec<(Formula, bool)>,
    pub values: BTreeMap<Term, Rat>,
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let values = self
            .values
            .iter()
            .map(|(t, v)| format!("{t} = {}", crate::logic::format_rat(v)));
        let atoms = self
            .atoms
            .iter()
            .map(|(a, b)| if *b { a.to_string() } else { format!("!{a}") });
        let parts: Vec<String> = values.chain(atoms).collect();
        f.write_str(&parts.join(", "))
    }
}

impl Witness {
    pub fn value(&self, t: &Term) -> Option<&Rat> {
        self.values.get(t)
    }
}

fn opaque_atom(f: &Formula, lra: &Lra, bound: &mut Vec<Var>) -> Option<Formula> {
    match f {
        Formula::True | Formula::False => None,
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            bound.push(v.clone());
            let r = opaque_atom(b, lra, bound);
            bound.pop();
            r
        }
        a if a.is_atom() => {
            let free_of_bound = !bound.iter().any(|v| a.has_free(v));
            (free_of_bound && !lra.is_arith_atom(a)).then(|| a.clone())
        }
        other => other
            .children()
            .into_iter()
            .find_map(|c| opaque_atom(c, lra, bound)),
    }
}

/// A literal forced by a top-level conjunct, tried before other splits.
fn unit(f: &Formula, lra: &Lra) -> Option<(Formula, bool)> {
    let lit = |g: &Formula| match g {
        Formula::Not(a) if a.is_atom() && !lra.is_arith_atom(a) => Some(((**a).clone(), false)),
        a if a.is_atom() && !lra.is_arith_atom(a) => Some((a.clone(), true)),
        _ => None,
    };
    match f {
        Formula::And(parts) => parts.iter().find_map(lit),
        g => lit(g),
    }
}

fn assign(f: &Formula, atom: &Formula, val: bool) -> Formula {
    if f == atom {
        return if val { Formula::True } else { Formula::False };
    }
    if f.is_atom() {
        return f.clone();
    }
    f.map_children(|c| assign(c, atom, val))
}

fn search(
    f: Formula,
    lra: &Lra,
    trail: &mut Vec<(Formula, bool)>,
    budget: &mut usize,
) -> Result<Option<Witness>, QeError> {
    let f = simplify(&f);
    match f {
        Formula::True => {
            return Ok(Some(Witness {
                atoms: trail.clone(),
                values: BTreeMap::new(),
            }))
        }
        Formula::False => return Ok(None),
        _ => {}
    }
    if *budget == 0 {
        return Err(QeError::Undetermined("case split limit reached".into()));
    }
    *budget -= 1;
    let choice = match unit(&f, lra) {
        Some((a, v)) => Some((a, vec![v])),
        None => opaque_atom(&f, lra, &mut Vec::new()).map(|a| (a, vec![true, false])),
    };
    match choice {
        Some((atom, vals)) => {
            for v in vals {
                trail.push((atom.clone(), v));
                let r = search(assign(&f, &atom, v), lra, trail, budget)?;
                trail.pop();
                if r.is_some() {
                    return Ok(r);
                }
            }
            Ok(None)
        }
        None => {
            let leaf_props: BTreeSet<String> = {
                let mut s = BTreeSet::new();
                f.visit_atoms(&mut |a| {
                    if !lra.is_arith_atom(a) {
                        s.insert(a.to_string());
                    }
                });
                s
            };
            if let Some(p) = leaf_props.into_iter().next() {
                return Err(QeError::Undetermined(format!(
                    "opaque atom under a real quantifier: {p}"
                )));
            }
            Ok(lra.model_of(&f)?.map(|values| Witness {
                atoms: trail.clone(),
                values,
            }))
        }
    }
}

/// A witness for `f`, or `None` if `f` is unsatisfiable.
pub fn find_witness(f: &Formula, lra: &Lra) -> Result<Option<Witness>, QeError> {
    search(f.clone(), lra, &mut Vec::new(), &mut 200_000)
}

pub fn satisfiable(f: &Formula, lra: &Lra) -> Result<bool, QeError> {
    Ok(find_witness(f, lra)?.is_some())
}

pub fn valid(f: &Formula, lra: &Lra) -> Result<bool, QeError> {
    Ok(find_witness(&crate::logic::simplify::negate(f), lra)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{rat, Sort, Term};

    fn p(n: &str) -> Formula {
        Formula::rel(n, vec![], Term::S0)
    }

    #[test]
    fn propositional_and_linear_mix() {
        let lra = Lra::default();
        let x = Term::var(&Var::real("x"));
        // (P -> x < 0) & (!P -> x > 5) & x = 3 is unsatisfiable.
        let f = Formula::and(vec![
            Formula::implies(p("P"), Formula::lt(x.clone(), Term::int(0))),
            Formula::implies(Formula::not(p("P")), Formula::lt(Term::int(5), x.clone())),
            Formula::eq(x.clone(), Term::int(3)),
        ]);
        assert!(!satisfiable(&f, &lra).unwrap());
        let g = Formula::and(vec![
            Formula::implies(p("P"), Formula::lt(x.clone(), Term::int(0))),
            Formula::eq(x.clone(), Term::int(3)),
        ]);
        let w = find_witness(&g, &lra).unwrap().unwrap();
        assert_eq!(w.value(&x), Some(&rat(3)));
        assert!(w.atoms.contains(&(p("P"), false)));
    }

    #[test]
    fn quantified_real_with_opaque_outside() {
        let lra = Lra::default();
        let y = Var::new("y", Sort::Real);
        let f = Formula::and(vec![
            p("Q"),
            Formula::exists(
                y.clone(),
                Formula::and(vec![
                    Formula::lt(Term::var(&y), Term::int(0)),
                    Formula::lt(Term::int(1), Term::var(&y)),
                ]),
            ),
        ]);
        assert!(!satisfiable(&f, &lra).unwrap());
        assert!(valid(&Formula::or(vec![p("Q"), Formula::not(p("Q"))]), &lra).unwrap());
    }
}
