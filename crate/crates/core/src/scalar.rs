//! Arithmetic abstraction shared by every solver stage.
//!
//! The solvers run either on `f64` with an absolute comparison tolerance, or on
//! exact `BigRational` values where the tolerance is zero and every comparison is
//! decided exactly.

use std::cmp::Ordering;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Num, Pow, Signed, ToPrimitive, Zero};

/// Default tolerance used for floating-point equality and containment decisions.
pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;

/// Tolerance on the probability sum of an uncertain point.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Tolerance this arithmetic uses when none is configured.
    fn default_tolerance() -> Self;

    /// Converts a finite float. For exact arithmetic the conversion is exact
    /// (the binary value of the float, not its shortest decimal rendering).
    fn from_float(x: f64) -> Option<Self>;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses decimal text (`-1.25`, `3e-2`) or a fraction (`3/7`).
    fn parse_decimal(text: &str) -> Option<Self>;

    fn to_float(&self) -> f64;

    fn is_finite_value(&self) -> bool;

    fn from_count(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    /// Total order on finite values.
    fn cmp_value(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).unwrap_or(Ordering::Equal)
    }

    fn min_value(a: &Self, b: &Self) -> Self {
        if b < a {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn max_value(a: &Self, b: &Self) -> Self {
        if b > a {
            b.clone()
        } else {
            a.clone()
        }
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        DEFAULT_FLOAT_TOLERANCE
    }

    fn from_float(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let value = match text.split_once('/') {
            Some((n, d)) => n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?,
            None => text.parse::<f64>().ok()?,
        };
        value.is_finite().then_some(value)
    }

    fn to_float(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn default_tolerance() -> Self {
        BigRational::zero()
    }

    fn from_float(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n = parse_exact_decimal(n.trim())?;
            let d = parse_exact_decimal(d.trim())?;
            return (!d.is_zero()).then(|| n / d);
        }
        parse_exact_decimal(text)
    }

    fn to_float(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

fn parse_exact_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str_radix(if all_digits.is_empty() { "0" } else { &all_digits }, 10)
        .ok()?;
    let ten = BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(Pow::pow(&ten, scale as u32));
    } else {
        value /= BigRational::from_integer(Pow::pow(&ten, (-scale) as u32));
    }
    Some(if negative { -value } else { value })
}

/// Comparison policy: values closer than `eps` are equal, and the inclusive
/// side of every `<=` test wins ties.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerance<T> {
    eps: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(eps: T) -> Self {
        assert!(eps >= T::zero(), "tolerance must be non-negative");
        Tolerance { eps }
    }

    pub fn exact() -> Self {
        Tolerance { eps: T::zero() }
    }

    pub fn eps(&self) -> &T {
        &self.eps
    }

    pub fn eq(&self, a: &T, b: &T) -> bool {
        (a.clone() - b.clone()).abs() <= self.eps
    }

    /// `a <= b` up to tolerance.
    pub fn le(&self, a: &T, b: &T) -> bool {
        a.clone() <= b.clone() + self.eps.clone()
    }

    /// `a < b` by more than the tolerance.
    pub fn lt(&self, a: &T, b: &T) -> bool {
        a.clone() + self.eps.clone() < b.clone()
    }

    pub fn is_zero(&self, a: &T) -> bool {
        a.abs() <= self.eps
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Tolerance::new(T::default_tolerance())
    }
}

pub(crate) fn sort_values<T: Scalar>(values: &mut [T]) {
    values.sort_by(|a, b| a.cmp_value(b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_decimal_parsing() {
        let q = BigRational::parse_decimal("0.3").unwrap();
        assert_eq!(q, BigRational::from_ratio(3, 10));
        let q = BigRational::parse_decimal("-1.25e-1").unwrap();
        assert_eq!(q, BigRational::from_ratio(-1, 8));
        let q = BigRational::parse_decimal("3/7").unwrap();
        assert_eq!(q, BigRational::from_ratio(3, 7));
        assert_eq!(BigRational::parse_decimal("12").unwrap(), BigRational::from_ratio(12, 1));
        assert!(BigRational::parse_decimal("abc").is_none());
        assert!(BigRational::parse_decimal("1/0").is_none());
    }

    #[test]
    fn float_parsing() {
        assert_eq!(f64::parse_decimal("0.25"), Some(0.25));
        assert_eq!(f64::parse_decimal("1/4"), Some(0.25));
        assert_eq!(f64::parse_decimal("inf"), None);
    }

    #[test]
    fn tolerance_ties_go_to_inclusive_side() {
        let tol = Tolerance::new(1e-9);
        assert!(tol.le(&(1.0 + 5e-10), &1.0));
        assert!(!tol.lt(&(1.0 - 5e-10), &1.0));
        assert!(tol.lt(&(1.0 - 5e-9), &1.0));
        let exact = Tolerance::<BigRational>::exact();
        let a = BigRational::from_ratio(1, 3);
        let b = BigRational::from_ratio(1, 3) + BigRational::from_ratio(1, 1_000_000_000_000);
        assert!(exact.lt(&a, &b));
        assert!(!exact.eq(&a, &b));
    }
}
