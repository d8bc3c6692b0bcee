//! Linear expressions over opaque atoms with exact rational coefficients.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::logic::{ArithOp, Rat, Term, Var};

/// `Σ cᵢ·kᵢ + constant`, where each key `kᵢ` is a variable or any other
/// non-arithmetic term treated as an unknown.
#[derive(Clone, PartialEq, Eq, Debug, Default, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Term, Rat>,
    pub constant: Rat,
}

impl LinExpr {
    pub fn constant(c: Rat) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn atom(t: Term) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(t, Rat::one());
        LinExpr {
            coeffs,
            constant: Rat::zero(),
        }
    }

    pub fn var(v: &Var) -> Self {
        LinExpr::atom(Term::Var(v.clone()))
    }

    /// `None` when the term multiplies two non-constant factors.
    pub fn from_term(t: &Term) -> Option<LinExpr> {
        match t {
            Term::Num(r) => Some(LinExpr::constant(r.clone())),
            Term::Arith(ArithOp::Add, a, b) => {
                Some(LinExpr::from_term(a)?.add(&LinExpr::from_term(b)?))
            }
            Term::Arith(ArithOp::Sub, a, b) => {
                Some(LinExpr::from_term(a)?.sub(&LinExpr::from_term(b)?))
            }
            Term::Arith(ArithOp::Mul, a, b) => {
                let (x, y) = (LinExpr::from_term(a)?, LinExpr::from_term(b)?);
                if x.is_constant() {
                    Some(y.scale(&x.constant))
                } else if y.is_constant() {
                    Some(x.scale(&y.constant))
                } else {
                    None
                }
            }
            other => Some(LinExpr::atom(other.clone())),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, key: &Term) -> Rat {
        self.coeffs.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeff_of(&self, v: &Var) -> Rat {
        self.coeff(&Term::Var(v.clone()))
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.coeffs.keys().any(|k| k.mentions_var(v))
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                out.coeffs.remove(k);
            }
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> LinExpr {
        if c.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
            constant: &self.constant * c,
        }
    }

    /// Replaces the atom `key` by the expression `by`.
    pub fn substitute(&self, key: &Term, by: &LinExpr) -> LinExpr {
        let c = self.coeff(key);
        if c.is_zero() {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.coeffs.remove(key);
        rest.add(&by.scale(&c))
    }

    /// Evaluates when every key has a value in `env`.
    pub fn eval(&self, env: &dyn Fn(&Term) -> Option<Rat>) -> Option<Rat> {
        let mut acc = self.constant.clone();
        for (k, c) in &self.coeffs {
            acc += c * env(k)?;
        }
        Some(acc)
    }

    /// Canonical term: keys in order, then the constant.
    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (k, c) in &self.coeffs {
            let mag = c.abs();
            let piece = if mag.is_one() {
                k.clone()
            } else {
                Term::mul(Term::Num(mag), k.clone())
            };
            acc = Some(match acc {
                None if c.is_negative() => Term::mul(Term::Num(c.clone()), k.clone()),
                None => piece,
                Some(a) if c.is_negative() => Term::sub(a, piece),
                Some(a) => Term::add(a, piece),
            });
        }
        match acc {
            None => Term::Num(self.constant.clone()),
            Some(a) if self.constant.is_zero() => a,
            Some(a) if self.constant.is_negative() => {
                Term::sub(a, Term::Num(-self.constant.clone()))
            }
            Some(a) => Term::add(a, Term::Num(self.constant.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::rat;

    #[test]
    fn normalizes_queue_expression() {
        let q = Term::fluent("que_init", vec![Term::obj("I"), Term::obj("in1")], Term::S0);
        // q − 10·(2−1) − (15+5)·(3−2)
        let e = Term::sub(
            Term::sub(
                q.clone(),
                Term::mul(Term::int(10), Term::sub(Term::int(2), Term::int(1))),
            ),
            Term::mul(
                Term::add(Term::int(15), Term::int(5)),
                Term::sub(Term::int(3), Term::int(2)),
            ),
        );
        let l = LinExpr::from_term(&e).unwrap();
        assert_eq!(l.coeff(&q), rat(1));
        assert_eq!(l.constant, rat(-30));
        assert_eq!(l.to_term().to_string(), format!("{q} - 30"));
    }

    #[test]
    fn rejects_products_of_unknowns() {
        let x = Term::Var(Var::real("x"));
        assert!(LinExpr::from_term(&Term::mul(x.clone(), x)).is_none());
    }

    #[test]
    fn substitution() {
        let x = Var::real("x");
        let y = Var::real("y");
        let e = LinExpr::var(&x)
            .scale(&rat(2))
            .add(&LinExpr::constant(rat(1)));
        let by = LinExpr::var(&y).add(&LinExpr::constant(rat(3)));
        let out = e.substitute(&Term::Var(x), &by);
        assert_eq!(out.coeff_of(&y), rat(2));
        assert_eq!(out.constant, rat(7));
    }
}
