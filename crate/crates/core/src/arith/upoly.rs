//! Dense univariate polynomials over the rationals, Sturm sequences and
//! exact real root isolation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::logic::{format_rat, rat, Rat};

/// Coefficients in increasing degree, without trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UPoly {
    c: Vec<Rat>,
}

impl UPoly {
    pub fn from_coeffs(c: Vec<Rat>) -> Self {
        let mut p = UPoly { c };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        UPoly { c: vec![] }
    }

    pub fn constant(r: Rat) -> Self {
        UPoly::from_coeffs(vec![r])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        UPoly::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.c.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn sign_at(&self, x: &Rat) -> i8 {
        sign(&self.eval(x))
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| {
                self.c.get(i).cloned().unwrap_or_default() + o.c.get(i).cloned().unwrap_or_default()
            })
            .collect();
        UPoly::from_coeffs(c)
    }

    pub fn neg(&self) -> UPoly {
        UPoly {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Rat) -> UPoly {
        UPoly::from_coeffs(self.c.iter().map(|a| a * k).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Rat::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::from_coeffs(c)
    }

    pub fn pow(&self, n: u32) -> UPoly {
        (0..n).fold(UPoly::constant(Rat::one()), |acc, _| acc.mul(self))
    }

    /// `p(q(x))`.
    pub fn compose(&self, q: &UPoly) -> UPoly {
        let mut acc = UPoly::zero();
        for a in self.c.iter().rev() {
            acc = acc.mul(q).add(&UPoly::constant(a.clone()));
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * rat(i as i64))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.c.len() - 1;
        let lead = d.lead();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Rat::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let k = &r[i + dd] / &lead;
            if !k.is_zero() {
                for (j, b) in d.c.iter().enumerate() {
                    r[i + j] -= &k * b;
                }
            }
            q[i] = k;
        }
        (UPoly::from_coeffs(q), UPoly::from_coeffs(r))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&(Rat::one() / self.lead()))
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The product of the distinct irreducible factors, monic.
    pub fn squarefree(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn sturm(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        seq
    }

    /// Number of distinct real roots in `(lo, hi]`.
    pub fn count_roots(&self, lo: &Rat, hi: &Rat) -> usize {
        let seq = self.sturm();
        variations(&seq, lo).saturating_sub(variations(&seq, hi))
    }

    /// Number of distinct real roots in the open interval `(lo, hi)`.
    pub fn count_roots_open(&self, lo: &Rat, hi: &Rat) -> usize {
        if lo >= hi {
            return 0;
        }
        let n = self.count_roots(lo, hi);
        if self.eval(hi).is_zero() {
            n - 1
        } else {
            n
        }
    }

    /// A bound exceeding the magnitude of every real root.
    pub fn root_bound(&self) -> Rat {
        let lead = self.lead().abs();
        let m = self
            .c
            .iter()
            .map(|a| a.abs() / &lead)
            .max()
            .unwrap_or_default();
        m + rat(1)
    }

    /// All distinct real roots in increasing order.
    pub fn real_roots(&self) -> Vec<Real> {
        if self.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut p = self.squarefree();
        let mut roots: Vec<Real> = Vec::new();
        for r in rational_roots(&p) {
            roots.push(Real::Rat(r.clone()));
            p = p.div_rem(&UPoly::from_coeffs(vec![-r, Rat::one()])).0;
        }
        if p.degree().unwrap_or(0) > 0 {
            let b = p.root_bound();
            isolate(&p, -b.clone(), b, &mut roots);
        }
        roots.sort_by(|a, b| a.cmp_real(b));
        roots
    }
}

fn sign(r: &Rat) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(seq: &[UPoly], x: &Rat) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s != 0 {
            if last != 0 && s != last {
                n += 1;
            }
            last = s;
        }
    }
    n
}

fn isolate(p: &UPoly, lo: Rat, hi: Rat, out: &mut Vec<Real>) {
    let n = p.count_roots(&lo, &hi);
    if n == 0 {
        return;
    }
    if p.eval(&hi).is_zero() {
        out.push(Real::Rat(hi.clone()));
        if n > 1 {
            let mid = (&lo + &hi) / rat(2);
            isolate(p, lo, mid.clone(), out);
            isolate(p, mid, hi, out);
        }
        return;
    }
    // The lower endpoint must not be a root so that signs differ at the ends.
    if n == 1 && !p.eval(&lo).is_zero() {
        out.push(Real::Alg(Algebraic {
            poly: p.clone(),
            lo,
            hi,
        }));
        return;
    }
    let mid = (&lo + &hi) / rat(2);
    isolate(p, lo, mid.clone(), out);
    isolate(p, mid, hi, out);
}

const RATIONAL_ROOT_LIMIT: u64 = 1_000_000;

/// Rational roots found by the rational root theorem when the integer
/// coefficients are small enough to enumerate divisors.
fn rational_roots(p: &UPoly) -> Vec<Rat> {
    let deg = match p.degree() {
        Some(d) if d > 0 => d,
        _ => return vec![],
    };
    if deg == 1 {
        return vec![-&p.coeffs()[0] / &p.coeffs()[1]];
    }
    let mut lcm = BigInt::one();
    for a in p.coeffs() {
        lcm = lcm.lcm(a.denom());
    }
    let ints: Vec<BigInt> = p
        .coeffs()
        .iter()
        .map(|a| (a * Rat::from(lcm.clone())).to_integer())
        .collect();
    let mut out = Vec::new();
    if ints[0].is_zero() {
        out.push(Rat::zero());
    }
    let a0 = ints
        .iter()
        .find(|a| !a.is_zero())
        .cloned()
        .unwrap_or_default()
        .abs();
    let an = ints[deg].abs();
    let (Some(a0u), Some(anu)) = (a0.to_u64(), an.to_u64()) else {
        return out;
    };
    if a0u > RATIONAL_ROOT_LIMIT || anu > RATIONAL_ROOT_LIMIT {
        return out;
    }
    for num in divisors(a0u) {
        for den in divisors(anu) {
            for s in [1i64, -1] {
                let r = Rat::new(BigInt::from(num) * s, BigInt::from(den));
                if !r.is_zero() && p.eval(&r).is_zero() && !out.contains(&r) {
                    out.push(r);
                }
            }
        }
    }
    out
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n.is_multiple_of(i) {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

/// The unique root of a squarefree `poly` in the open interval `(lo, hi)`,
/// with `poly` nonzero at both ends.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Algebraic {
    pub poly: UPoly,
    pub lo: Rat,
    pub hi: Rat,
}

impl Algebraic {
    /// Halves the isolating interval; returns the exact root if the midpoint
    /// hits it.
    pub fn refine(&mut self) -> Option<Rat> {
        let mid = (&self.lo + &self.hi) / rat(2);
        let sm = self.poly.sign_at(&mid);
        if sm == 0 {
            return Some(mid);
        }
        if sm == self.poly.sign_at(&self.lo) {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
        None
    }

    pub fn to_f64(&self) -> f64 {
        let mut a = self.clone();
        for _ in 0..60 {
            if let Some(r) = a.refine() {
                return r.to_f64().unwrap_or(f64::NAN);
            }
        }
        ((&a.lo + &a.hi) / rat(2)).to_f64().unwrap_or(f64::NAN)
    }
}

/// An exact real algebraic number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Real {
    Rat(Rat),
    Alg(Algebraic),
}

impl Real {
    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Real::Rat(r) => Some(r),
            Real::Alg(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Alg(a) => a.to_f64(),
        }
    }

    /// Sign of `q` at this number.
    pub fn sign_of(&self, q: &UPoly) -> i8 {
        match self {
            Real::Rat(r) => q.sign_at(r),
            Real::Alg(a) => {
                let g = a.poly.gcd(q);
                if g.degree().unwrap_or(0) > 0 && g.count_roots_open(&a.lo, &a.hi) > 0 {
                    return 0;
                }
                let mut a = a.clone();
                loop {
                    if q.count_roots(&a.lo, &a.hi) == 0 && !q.eval(&a.lo).is_zero() {
                        return q.sign_at(&a.lo);
                    }
                    if let Some(r) = a.refine() {
                        return q.sign_at(&r);
                    }
                }
            }
        }
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        match self {
            Real::Rat(x) => x.cmp(r),
            Real::Alg(a) => {
                if r <= &a.lo {
                    Ordering::Greater
                } else if r >= &a.hi {
                    Ordering::Less
                } else if a.poly.eval(r).is_zero() {
                    Ordering::Equal
                } else if a.poly.count_roots(&a.lo, r) > 0 {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn cmp_real(&self, other: &Real) -> Ordering {
        match (self, other) {
            (_, Real::Rat(r)) => self.cmp_rat(r),
            (Real::Rat(r), _) => other.cmp_rat(r).reverse(),
            (Real::Alg(a), Real::Alg(b)) => {
                let (mut a, mut b) = (a.clone(), b.clone());
                let g = a.poly.gcd(&b.poly);
                loop {
                    if a.hi <= b.lo {
                        return Ordering::Less;
                    }
                    if b.hi <= a.lo {
                        return Ordering::Greater;
                    }
                    let lo = (&a.lo).max(&b.lo).clone();
                    let hi = (&a.hi).min(&b.hi).clone();
                    if g.degree().unwrap_or(0) > 0 && g.count_roots_open(&lo, &hi) > 0 {
                        return Ordering::Equal;
                    }
                    if let Some(r) = a.refine() {
                        return Real::Rat(r).cmp_real(&Real::Alg(b));
                    }
                    if let Some(r) = b.refine() {
                        return Real::Alg(a).cmp_real(&Real::Rat(r));
                    }
                }
            }
        }
    }

    /// A rational lying strictly between `self` and a larger `other`.
    pub fn rational_between(&self, other: &Real) -> Rat {
        let (mut a, mut b) = (self.clone(), other.clone());
        loop {
            let ua = match &a {
                Real::Rat(r) => r.clone(),
                Real::Alg(x) => x.hi.clone(),
            };
            let lb = match &b {
                Real::Rat(r) => r.clone(),
                Real::Alg(x) => x.lo.clone(),
            };
            if ua < lb {
                return (ua + lb) / rat(2);
            }
            if let Real::Alg(x) = &mut a {
                if let Some(r) = x.refine() {
                    a = Real::Rat(r);
                }
            }
            if let Real::Alg(x) = &mut b {
                if let Some(r) = x.refine() {
                    b = Real::Rat(r);
                }
            }
            if let (Real::Rat(x), Real::Rat(y)) = (&a, &b) {
                assert!(x < y, "rational_between requires self < other");
            }
        }
    }

    /// A rational lower bound.
    pub fn floor_rat(&self) -> Rat {
        match self {
            Real::Rat(r) => r.clone(),
            Real::Alg(a) => a.lo.clone(),
        }
    }

    /// A rational upper bound.
    pub fn ceil_rat(&self) -> Rat {
        match self {
            Real::Rat(r) => r.clone(),
            Real::Alg(a) => a.hi.clone(),
        }
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let mag = a.abs();
            if first {
                if a.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if a.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let coeff = if mag.is_one() && i > 0 {
                String::new()
            } else {
                format_rat(&mag)
            };
            match i {
                0 => write!(f, "{coeff}")?,
                1 if coeff.is_empty() => f.write_str("t")?,
                1 => write!(f, "{coeff}*t")?,
                _ if coeff.is_empty() => write!(f, "t^{i}")?,
                _ => write!(f, "{coeff}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rat(r) => f.write_str(&format_rat(r)),
            Real::Alg(a) => write!(
                f,
                "root of {} in ({}, {}) ~ {:.6}",
                a.poly,
                format_rat(&a.lo),
                format_rat(&a.hi),
                a.to_f64()
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ratio;
    use proptest::prelude::*;

    fn p(cs: &[i64]) -> UPoly {
        UPoly::from_coeffs(cs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn rational_roots_are_exact() {
        // (2t - 1)(t - 3) = 2t² - 7t + 3
        let roots = p(&[3, -7, 2]).real_roots();
        assert_eq!(roots, vec![Real::Rat(ratio(1, 2)), Real::Rat(rat(3))]);
    }

    #[test]
    fn irrational_roots_are_isolated() {
        // t² - 2
        let roots = p(&[-2, 0, 1]).real_roots();
        assert_eq!(roots.len(), 2);
        assert!((roots[1].to_f64() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(roots[0].cmp_real(&roots[1]), Ordering::Less);
        assert_eq!(roots[1].sign_of(&p(&[-2, 0, 1])), 0);
        assert_eq!(roots[1].sign_of(&p(&[-1, 1])), 1);
        assert_eq!(roots[1].cmp_rat(&ratio(3, 2)), Ordering::Less);
        assert_eq!(roots[1].cmp_rat(&ratio(7, 5)), Ordering::Greater);
    }

    #[test]
    fn equal_algebraics_compare_equal() {
        let a = p(&[-2, 0, 1]).real_roots().pop().unwrap();
        // (t² - 2)(t + 5)
        let b = p(&[-2, 0, 1]).mul(&p(&[5, 1])).real_roots().pop().unwrap();
        assert_eq!(a.cmp_real(&b), Ordering::Equal);
    }

    #[test]
    fn repeated_roots_counted_once() {
        let roots = p(&[1, -2, 1]).real_roots();
        assert_eq!(roots, vec![Real::Rat(rat(1))]);
    }

    proptest! {
        #[test]
        fn roots_of_products_of_linears(rs in proptest::collection::vec(-20i64..20, 1..5)) {
            let mut poly = UPoly::constant(rat(1));
            for r in &rs {
                poly = poly.mul(&p(&[-r, 1]));
            }
            let mut expect: Vec<i64> = rs.clone();
            expect.sort();
            expect.dedup();
            let got: Vec<Real> = poly.real_roots();
            prop_assert_eq!(got, expect.into_iter().map(|r| Real::Rat(rat(r))).collect::<Vec<_>>());
        }

        #[test]
        fn sturm_count_matches_sign_changes(a in -10i64..10, b in -10i64..10, c in 1i64..5) {
            // c(t - a)(t - b) + 1 has 0 or 2 roots; count by isolation and by Sturm agree.
            let poly = p(&[-a, 1]).mul(&p(&[-b, 1])).scale(&rat(c)).add(&p(&[1]));
            let roots = poly.real_roots();
            let bound = poly.root_bound();
            prop_assert_eq!(roots.len(), poly.count_roots(&-bound.clone(), &bound));
            for r in &roots {
                prop_assert_eq!(r.sign_of(&poly), 0);
            }
        }
    }
}
