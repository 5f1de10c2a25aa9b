//! Exact rational numbers and the few helpers shared across modules.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Division with the `0/0 = 0` convention. Any other zero denominator is a
/// caller bug and yields `None`.
pub fn div_zero_convention(num: &Rational, den: &Rational) -> Option<Rational> {
    if den.is_zero() {
        if num.is_zero() {
            Some(Rational::zero())
        } else {
            None
        }
    } else {
        Some(num / den)
    }
}

pub fn max_ref<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn in_unit_interval(x: &Rational) -> bool {
    !x.is_negative() && x <= &Rational::one()
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let t = s.trim();
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return None;
    }
    let r: Rational = t.parse().ok()?;
    Some(r)
}

/// Canonical `num/den` rendering (integers keep a `/1` suffix so the format
/// is uniform).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn sum<'a, I: IntoIterator<Item = &'a Rational>>(it: I) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(div_zero_convention(&int(0), &int(0)), Some(int(0)));
        assert_eq!(div_zero_convention(&int(1), &int(0)), None);
        assert_eq!(div_zero_convention(&int(2), &int(3)), Some(rat(2, 3)));
    }

    #[test]
    fn parse_rejects_decimals() {
        assert_eq!(parse_rational("1/2"), Some(rat(1, 2)));
        assert_eq!(parse_rational(" 3 "), Some(int(3)));
        assert_eq!(parse_rational("-4/6"), Some(rat(-2, 3)));
        assert_eq!(parse_rational("0.5"), None);
        assert_eq!(parse_rational("1e3"), None);
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn format_is_num_over_den() {
        assert_eq!(format_rational(&int(3)), "3/1");
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
    }
}
