//! Exact rationals. Every real-valued quantity in the engine is a [`Rat`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Renders as an integer or `p/q`; never as a decimal.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `12`, `-3`, `7/2` or the finite decimal `1.25`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches('-');
        let whole: BigInt = if int_abs.is_empty() {
            BigInt::zero()
        } else {
            int_abs.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac: BigInt = frac.parse().ok()?;
        let v = Rat::new(whole * &scale + frac, scale);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Rat::from_integer)
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_unit(r: &Rat) -> bool {
    r.is_one()
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_without_decimals() {
        assert_eq!(format_rat(&ratio(1, 2)), "1/2");
        assert_eq!(format_rat(&ratio(-6, 3)), "-2");
        assert_eq!(format_rat(&rat(70)), "70");
    }

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rat("7/2"), Some(ratio(7, 2)));
        assert_eq!(parse_rat("0.5"), Some(ratio(1, 2)));
        assert_eq!(parse_rat("-1.25"), Some(ratio(-5, 4)));
        assert_eq!(parse_rat("42"), Some(rat(42)));
        assert_eq!(parse_rat("1/0"), None);
        assert_eq!(parse_rat("x"), None);
    }
}
