//! Scalar abstractions.
//!
//! The combinatorial side (scenarios, polytopes, inequality parameters) is
//! generic over an exact ordered field; the quantum side is generic over a
//! floating-point type.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// An exact ordered field: every operation is exact, comparisons are total.
pub trait ExactField:
    Num + Signed + Clone + Ord + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Renders the value as `"p/q"` in lowest terms, always with a denominator.
    fn to_fraction_string(&self) -> String;

    /// Parses `"p/q"` or a bare integer `"p"`. Returns `None` on malformed
    /// input or a zero denominator.
    fn parse_fraction(text: &str) -> Option<Self>;

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_i64(numer).expect("integer fits") / Self::from_i64(denom).expect("integer fits")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_zero_or_one(&self) -> bool {
        self.is_zero() || self.is_one()
    }
}

impl<I> ExactField for Ratio<I>
where
    I: Integer + Signed + Clone + Debug + Display + FromStr + Send + Sync + 'static,
    Ratio<I>: FromPrimitive + ToPrimitive,
{
    fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    fn parse_fraction(text: &str) -> Option<Self> {
        let text = text.trim();
        let (numer, denom) = match text.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (text, "1"),
        };
        let numer: I = numer.parse().ok()?;
        let denom: I = denom.parse().ok()?;
        if denom.is_zero() {
            return None;
        }
        Some(Ratio::new(numer, denom))
    }
}

/// A real floating-point scalar (`f32` or `f64`) for the quantum evaluator.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::{BigRational, Rational64};

    #[test]
    fn fraction_strings_are_reduced() {
        let q = BigRational::new(BigInt::from(6), BigInt::from(-10));
        assert_eq!(q.to_fraction_string(), "-3/5");
        assert_eq!(BigRational::from_ratio(4, 2).to_fraction_string(), "2/1");
    }

    #[test]
    fn parse_fraction_forms() {
        assert_eq!(Rational64::parse_fraction("2/10"), Some(Rational64::new(1, 5)));
        assert_eq!(Rational64::parse_fraction(" 7 "), Some(Rational64::from_integer(7)));
        assert_eq!(Rational64::parse_fraction("1/0"), None);
        assert_eq!(Rational64::parse_fraction("a/2"), None);
        assert_eq!(BigRational::parse_fraction("-0/3").unwrap().to_fraction_string(), "0/1");
    }
}
