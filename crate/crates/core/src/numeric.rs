//! Scalar types shared by the spectral machinery.
//!
//! Two families of arithmetic are used throughout the crate:
//!
//! * [`Magnitude`] is a multiplicative, totally ordered value used for
//!   eigenvalue products and threshold comparisons. It is implemented by
//!   [`LogValue`] (natural log of a non-negative float, `0 ↦ −∞`) and by
//!   [`BigRational`] for exact decisions of the strict inequality `λ > ε²`.
//! * [`Real`] is an ordinary field used for coefficient vectors and finite
//!   sums. It is implemented by `f64` and [`BigRational`].

use std::cmp::Ordering;
use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Absolute log-domain tolerance below which a float comparison against a
/// threshold is reported as a tie.
pub const LOG_TIE_TOLERANCE: f64 = 1e-12;

/// Outcome of comparing an eigenvalue against a counting threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdCmp {
    Above,
    NotAbove,
    /// Float mode only: within [`LOG_TIE_TOLERANCE`] of the threshold.
    /// Treated as "not above" by every counter, and reported.
    Tie,
}

impl ThresholdCmp {
    pub fn is_above(self) -> bool {
        self == ThresholdCmp::Above
    }
}

/// A non-negative quantity closed under multiplication and division.
pub trait Magnitude: Clone + Debug + Send + Sync + 'static {
    type Key: Hash + Eq + Clone + Debug + Send + Sync;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, other: &Self) -> Self;
    /// Division by zero yields `+∞` semantics in float mode and panics in
    /// rational mode; callers never divide by a zero eigenvalue.
    fn div(&self, other: &Self) -> Self;
    fn total_cmp(&self, other: &Self) -> Ordering;
    fn compare_threshold(&self, threshold: &Self) -> ThresholdCmp;
    /// Linear-domain value (may underflow to 0).
    fn to_f64(&self) -> f64;
    /// Natural logarithm of the value (`−∞` for zero).
    fn ln(&self) -> f64;
    fn key(&self) -> Self::Key;

    fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }
}

/// A non-negative real stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue(pub f64);

impl LogValue {
    pub fn from_linear(x: f64) -> Self {
        debug_assert!(x >= 0.0, "negative magnitude {x}");
        LogValue(x.ln())
    }
}

impl Magnitude for LogValue {
    type Key = u64;

    fn zero() -> Self {
        LogValue(f64::NEG_INFINITY)
    }

    fn one() -> Self {
        LogValue(0.0)
    }

    fn is_zero(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        LogValue(self.0 + other.0)
    }

    fn div(&self, other: &Self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LogValue(self.0 - other.0)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    fn compare_threshold(&self, threshold: &Self) -> ThresholdCmp {
        if self.is_zero() {
            return ThresholdCmp::NotAbove;
        }
        if threshold.is_zero() {
            return ThresholdCmp::Above;
        }
        let diff = self.0 - threshold.0;
        if diff.abs() <= LOG_TIE_TOLERANCE {
            ThresholdCmp::Tie
        } else if diff > 0.0 {
            ThresholdCmp::Above
        } else {
            ThresholdCmp::NotAbove
        }
    }

    fn to_f64(&self) -> f64 {
        self.0.exp()
    }

    fn ln(&self) -> f64 {
        self.0
    }

    fn key(&self) -> u64 {
        self.0.to_bits()
    }

    fn pow(&self, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        if self.is_zero() {
            return Self::zero();
        }
        LogValue(self.0 * f64::from(exp))
    }
}

impl Magnitude for BigRational {
    type Key = BigRational;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn compare_threshold(&self, threshold: &Self) -> ThresholdCmp {
        if self > threshold {
            ThresholdCmp::Above
        } else {
            ThresholdCmp::NotAbove
        }
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn ln(&self) -> f64 {
        if Zero::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        // ln(p/q) = ln p − ln q, robust for huge numerators/denominators.
        big_ln(self.numer()) - big_ln(self.denom())
    }

    fn key(&self) -> BigRational {
        self.clone()
    }

    fn pow(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * std::f64::consts::LN_2
}

/// Converts a rational to the nearest representable float, without
/// overflowing on large numerators and denominators.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * Magnitude::ln(&x.abs()).exp()
}

/// Field operations used for coefficient vectors and exhaustive sums.
pub trait Real:
    Clone + Debug + PartialEq + PartialOrd + Send + Sync + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs_f64(&self) -> f64;
    fn to_f64(&self) -> f64;
    fn is_exact() -> bool;
    /// True when `self` should be dropped from a sparse vector whose
    /// largest entry has magnitude `scale`.
    fn is_negligible(&self, scale: f64) -> bool;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Relative pruning level for float coefficient vectors.
pub const FLOAT_PRUNE_RELATIVE: f64 = 1e-15;

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
    fn is_negligible(&self, scale: f64) -> bool {
        *self == 0.0 || self.abs() < FLOAT_PRUNE_RELATIVE * scale
    }
}

impl Real for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        BigRational::new(numer.into(), denom.into())
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs_f64(&self) -> f64 {
        rational_to_f64(self).abs()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn is_exact() -> bool {
        true
    }
    fn is_negligible(&self, _scale: f64) -> bool {
        Zero::is_zero(self)
    }
}

/// Parses a decimal (`"0.3"`, `"-1.5e-3"`) or fraction (`"3/10"`) literal
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::InvalidNumber(text.to_string());
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if Zero::is_zero(&d) {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all_digits.is_empty() {
        BigInt::zero()
    } else {
        all_digits.parse().map_err(|_| bad())?
    };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Exact rational for the shortest decimal representation of `x`, so that
/// `0.3_f64` maps to `3/10` rather than to its binary expansion.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidNumber(x.to_string()));
    }
    parse_rational(&format!("{x}"))
}

/// `n!` as a float (exact up to 22!).
pub fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `ln(n!)` via summation; exact enough for the moderate `n` used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("0.3").unwrap(), q(3, 10));
        assert_eq!(parse_rational("3/10").unwrap(), q(3, 10));
        assert_eq!(parse_rational("-1.25").unwrap(), q(-5, 4));
        assert_eq!(parse_rational("2.5e-2").unwrap(), q(1, 40));
        assert_eq!(parse_rational("1e3").unwrap(), q(1000, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(rational_from_f64(0.9).unwrap(), q(9, 10));
    }

    #[test]
    fn log_threshold_ties_are_flagged() {
        let one = LogValue::from_linear(1.0);
        assert_eq!(one.compare_threshold(&LogValue::from_linear(1.0)), ThresholdCmp::Tie);
        assert_eq!(one.compare_threshold(&LogValue::from_linear(0.5)), ThresholdCmp::Above);
        assert_eq!(
            LogValue::zero().compare_threshold(&LogValue::from_linear(1e-300)),
            ThresholdCmp::NotAbove
        );
    }

    #[test]
    fn rational_threshold_is_strict() {
        let a = q(1, 4);
        assert_eq!(a.compare_threshold(&q(1, 4)), ThresholdCmp::NotAbove);
        assert_eq!(a.compare_threshold(&q(1, 5)), ThresholdCmp::Above);
    }

    #[test]
    fn rational_ln_handles_huge_values() {
        let tiny = num_traits::pow(q(1, 1000), 200);
        let ln = Magnitude::ln(&tiny);
        assert!((ln - 200.0 * (1e-3f64).ln()).abs() < 1e-9);
        assert_eq!(rational_to_f64(&tiny), 0.0);
    }
}
