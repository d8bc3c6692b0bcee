//! Multivariate polynomials in normal form, over opaque atoms.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::upoly::UPoly;
use crate::logic::{ArithOp, Rat, Term};

/// A monomial: atoms with positive exponents, sorted by atom.
pub type Monomial = Vec<(Term, u32)>;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MPoly {
    pub terms: BTreeMap<Monomial, Rat>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut m: BTreeMap<Term, u32> = a.iter().cloned().collect();
    for (k, e) in b {
        *m.entry(k.clone()).or_insert(0) += e;
    }
    m.into_iter().collect()
}

impl MPoly {
    pub fn constant(r: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(vec![], r);
        }
        MPoly { terms }
    }

    pub fn atom(t: Term) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(t, 1)], Rat::one());
        MPoly { terms }
    }

    pub fn from_term(t: &Term) -> MPoly {
        match t {
            Term::Num(r) => MPoly::constant(r.clone()),
            Term::Arith(op, a, b) => {
                let (a, b) = (MPoly::from_term(a), MPoly::from_term(b));
                match op {
                    ArithOp::Add => a.add(&b),
                    ArithOp::Sub => a.sub(&b),
                    ArithOp::Mul => a.mul(&b),
                }
            }
            other => MPoly::atom(other.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            let e = out.terms.entry(m.clone()).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> MPoly {
        if k.is_zero() {
            return MPoly::default();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.scale(&-Rat::one()))
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        let mut out = MPoly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut single = MPoly::default();
                single.terms.insert(mono_mul(ma, mb), ca * cb);
                out = out.add(&single);
            }
        }
        out
    }

    /// Highest exponent of `atom`.
    pub fn degree_in(&self, atom: &Term) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.iter().filter(|(k, _)| k == atom).map(|(_, e)| *e))
            .max()
            .unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn atoms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().map(|(k, _)| k.clone()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Substitutes rational values for atoms.
    pub fn eval_partial(&self, env: &dyn Fn(&Term) -> Option<Rat>) -> MPoly {
        let mut out = MPoly::default();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (k, e) in m {
                match env(k) {
                    Some(v) => {
                        for _ in 0..*e {
                            coeff *= &v;
                        }
                    }
                    None => rest.push((k.clone(), *e)),
                }
            }
            let mut single = MPoly::default();
            if !coeff.is_zero() {
                single.terms.insert(rest, coeff);
            }
            out = out.add(&single);
        }
        out
    }

    /// Univariate view in `atom`; `None` if another atom remains.
    pub fn to_upoly(&self, atom: &Term) -> Option<UPoly> {
        let mut c: Vec<Rat> = Vec::new();
        for (m, coeff) in &self.terms {
            let e = match m.as_slice() {
                [] => 0,
                [(k, e)] if k == atom => *e as usize,
                _ => return None,
            };
            if c.len() <= e {
                c.resize(e + 1, Rat::zero());
            }
            c[e] += coeff;
        }
        Some(UPoly::from_coeffs(c))
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (m, c) in &self.terms {
            let mut piece: Option<Term> = None;
            for (k, e) in m {
                for _ in 0..*e {
                    piece = Some(match piece {
                        None => k.clone(),
                        Some(p) => Term::mul(p, k.clone()),
                    });
                }
            }
            let piece = match piece {
                None => Term::Num(c.clone()),
                Some(p) if c.is_one() => p,
                Some(p) => Term::mul(Term::Num(c.clone()), p),
            };
            acc = Some(match acc {
                None => piece,
                Some(a) => Term::add(a, piece),
            });
        }
        acc.unwrap_or_else(|| Term::int(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{rat, Var};

    #[test]
    fn ballistic_flow_normal_form() {
        let h = Term::Var(Var::real("h"));
        let v = Term::Var(Var::real("v"));
        let t = Term::Var(Var::real("t"));
        // h + v·t − 5·t·t
        let e = Term::sub(
            Term::add(h.clone(), Term::mul(v.clone(), t.clone())),
            Term::mul(Term::mul(Term::int(5), t.clone()), t.clone()),
        );
        let p = MPoly::from_term(&e);
        assert_eq!(p.degree_in(&t), 2);
        let at0 = p.eval_partial(&|k| (k == &t).then(|| rat(0)));
        assert_eq!(at0, MPoly::atom(h.clone()));
        let ground = p.eval_partial(&|k| {
            if k == &h {
                Some(rat(5))
            } else if k == &v {
                Some(rat(0))
            } else {
                None
            }
        });
        let u = ground.to_upoly(&t).unwrap();
        assert_eq!(u.coeffs(), &[rat(5), rat(0), rat(-5)]);
    }
}
