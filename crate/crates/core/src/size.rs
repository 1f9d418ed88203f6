//! Exact rational quantities.
//!
//! Every item size in the crate is a [`Size`]: an arbitrary-precision
//! rational clamped to the closed unit interval. General rational values
//! (weights, costs, bounds) use the [`Q`] alias directly.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational.
pub type Q = BigRational;

/// Builds `num/den` as a reduced rational. Panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `n/d` or a bare integer. The result is reduced; `non_reduced`
/// reports whether the text was not already in lowest terms.
pub fn parse_rational(text: &str) -> Result<(Q, bool), Error> {
    let text = text.trim();
    let bad = || Error::Parse(format!("malformed rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (
            BigInt::from_str(n.trim()).map_err(|_| bad())?,
            BigInt::from_str(d.trim()).map_err(|_| bad())?,
        ),
        None => (BigInt::from_str(text).map_err(|_| bad())?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{text}`")));
    }
    let non_reduced = !num.gcd(&den).is_one() || den.is_negative();
    Ok((Q::new(num, den), non_reduced))
}

/// Renders `n/d` with an explicit denominator, including `0/1` and `1/1`.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Decimal rendering with `digits` fractional digits, truncated toward
/// negative infinity. Exact regardless of magnitude.
pub fn decimal(x: &Q, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (x * Q::from_integer(scale.clone())).floor().to_integer();
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let (int, frac) = abs.div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
}

/// Orders two rationals by cross-multiplication. Unlike `Ord for Ratio`,
/// whose continued-fraction walk recurses once per partial quotient, this
/// uses constant stack for operands of any size.
pub fn cmp_q(a: &Q, b: &Q) -> std::cmp::Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

/// Ceiling of a non-negative rational as `u64`.
pub fn ceil_u64(x: &Q) -> u64 {
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

/// Item size in `[0, 1]`, always in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Size(Q);

impl Size {
    pub fn new(value: Q) -> Result<Self, Error> {
        if value.is_negative() {
            return Err(Error::SizeOutOfRange(format!("size {} is negative", fmt_q(&value))));
        }
        if value > Q::one() {
            return Err(Error::SizeOutOfRange(format!("size exceeds 1: {}", fmt_q(&value))));
        }
        Ok(Size(value))
    }

    /// Convenience constructor for literals known to be in range.
    pub fn ratio(num: i64, den: i64) -> Self {
        Size::new(q(num, den)).expect("size literal out of range")
    }

    pub fn zero() -> Self {
        Size(Q::zero())
    }

    pub fn one() -> Self {
        Size(Q::one())
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    pub fn into_inner(self) -> Q {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Strictly greater than one half.
    pub fn is_large(&self) -> bool {
        self.0 > q(1, 2)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_q(&self.0))
    }
}

impl fmt::Debug for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Size({})", fmt_q(&self.0))
    }
}

impl FromStr for Size {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (value, _) = parse_rational(s)?;
        Size::new(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_reduces_and_flags() {
        let (x, non_reduced) = parse_rational("2/4").unwrap();
        assert_eq!(x, q(1, 2));
        assert!(non_reduced);
        let (x, non_reduced) = parse_rational("3/5").unwrap();
        assert_eq!(x, q(3, 5));
        assert!(!non_reduced);
        assert_eq!(parse_rational("7").unwrap().0, qi(7));
    }

    #[test]
    fn parse_rejects_zero_denominator() {
        assert!(matches!(parse_rational("1/0"), Err(Error::Parse(_))));
        assert!(matches!(parse_rational("x/3"), Err(Error::Parse(_))));
    }

    #[test]
    fn size_range() {
        assert!(Size::new(q(7, 5)).is_err());
        assert!(Size::new(q(-1, 5)).is_err());
        assert!(Size::new(Q::zero()).is_ok());
        assert!(Size::new(Q::one()).is_ok());
        assert!(Size::ratio(51, 100).is_large());
        assert!(!Size::ratio(1, 2).is_large());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&q(509, 301), 7), "1.6910299");
        assert_eq!(decimal(&q(1, 3), 3), "0.333");
        assert_eq!(decimal(&q(-1, 3), 2), "-0.34");
        assert_eq!(decimal(&qi(2), 0), "2");
    }
}
