//! Scalar fields shared by the operator layers.
//!
//! Exact checks run over [`Rational`]; rotations by a generic angle fall back
//! to `f64` and are compared against a tolerance instead.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

pub type Rational = num_rational::BigRational;

/// Entry type of a [`GradedOperator`](crate::fock::GradedOperator).
pub trait Scalar: Signed + Clone + PartialOrd + Debug + Send + Sync + 'static {
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    fn to_f64(&self) -> f64;

    /// `None` for exact fields, which cannot hold a generic real.
    fn from_f64(x: f64) -> Option<Self>;

    /// Zero for exact fields; within [`FLOAT_TOLERANCE`] for floats.
    fn negligible(&self) -> bool;

    /// Exact textual form, if the field is exact.
    fn exact_string(&self) -> Option<String>;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&rat(v, 1))
    }
}

/// Absolute tolerance for checks carried out in floating point.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(_: f64) -> Option<Self> {
        None
    }

    fn negligible(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }

    fn exact_string(&self) -> Option<String> {
        Some(self.to_string())
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }

    fn negligible(&self) -> bool {
        self.abs() <= FLOAT_TOLERANCE
    }

    fn exact_string(&self) -> Option<String> {
        None
    }
}

/// A reported number: its float value and, when computed exactly, the exact
/// rational.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact: Option<String>,
}

impl Measured {
    pub fn of<T: Scalar>(x: &T) -> Self {
        Self { value: x.to_f64(), exact: x.exact_string() }
    }
}

/// `num / den` as a big rational.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Largest absolute value in an iterator, zero when empty.
pub fn max_abs<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| {
        let a = v.abs();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

/// Parse `"p/q"`, `"p"` or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q == BigInt::from(0) {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let num: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(num, den);
        return Some(if negative { -r } else { r });
    }
    let p: BigInt = s.parse().ok()?;
    Some(Rational::from_integer(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/5"), Some(rat(3, 5)));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn max_abs_of_empty_is_zero() {
        assert_eq!(max_abs::<f64>(vec![]), 0.0);
        assert_eq!(max_abs(vec![rat(-3, 2), rat(1, 1)]), rat(3, 2));
    }
}
