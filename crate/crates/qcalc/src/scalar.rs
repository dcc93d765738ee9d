//! Scalar arithmetic behind the lattice operators: a double-precision
//! backend and an exact big-rational backend exposing one interface.
//!
//! Everything downstream (partitions, integrals, inequality verifiers) is
//! generic over [`Scalar`], so the same code path can be run in floating
//! point and cross-checked against exact rational arithmetic. The two
//! backends differ in three deliberate ways:
//!
//! - summation: the float backend accumulates with Neumaier-compensated
//!   summation (terms decay geometrically and derivative quotients cancel),
//!   the exact backend sums plainly;
//! - powers: the exact backend only accepts integer exponents, fractional
//!   exponents are a float-only operation;
//! - tolerance: verification verdicts absorb a relative `1e-12` slack in
//!   float and none at all in exact arithmetic.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use thiserror::Error;

/// Which realization of [`Scalar`] a value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackendKind {
    /// IEEE-754 double precision.
    Float,
    /// Arbitrary-precision rationals.
    Exact,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Float => write!(f, "float"),
            BackendKind::Exact => write!(f, "exact"),
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("exact backend requires an integer exponent, got {exponent}")]
    NonIntegerExponent { exponent: Exponent },
    #[error("zero cannot be raised to a negative power")]
    ZeroToNegativePower,
    #[error("negative base {base} cannot be raised to the fractional power {exponent}")]
    NegativeBaseFractionalPower { base: String, exponent: Exponent },
    #[error("exponent {0} does not fit the supported range")]
    ExponentOverflow(Exponent),
    #[error("cannot parse {0:?} as a scalar")]
    Parse(String),
}

/// A rational exponent, kept exact so integer-ness is decidable.
///
/// Exponents are the `p`, `s`, `t`, `r` parameters of the inequality
/// verifiers. They are small by nature; construction rejects numerators and
/// denominators beyond `10^9` so exponent arithmetic (`p + 1`, `s + t`)
/// cannot overflow.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Exponent(Ratio<i64>);

const EXPONENT_LIMIT: i64 = 1_000_000_000;

impl Exponent {
    pub fn from_int(k: i64) -> Self {
        assert!(k.abs() <= EXPONENT_LIMIT, "exponent out of range");
        Exponent(Ratio::from_integer(k))
    }

    /// Exact exponent `num/den`. Fails on a zero denominator or magnitudes
    /// beyond the supported range.
    pub fn new(num: i64, den: i64) -> Result<Self, ScalarError> {
        if den == 0 {
            return Err(ScalarError::Parse(format!("{num}/{den}")));
        }
        let ratio = Ratio::new(num, den);
        if ratio.numer().abs() > EXPONENT_LIMIT || ratio.denom().abs() > EXPONENT_LIMIT {
            return Err(ScalarError::ExponentOverflow(Exponent(ratio)));
        }
        Ok(Exponent(ratio))
    }

    pub fn one() -> Self {
        Exponent::from_int(1)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.0.is_integer().then(|| self.0.to_integer())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    /// The exponent as a scalar of the requested backend, exactly.
    pub fn to_scalar<S: Scalar>(&self) -> S {
        S::from_ratio(*self.0.numer(), *self.0.denom())
    }
}

impl std::ops::Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Exponent {
    type Err = ScalarError;

    fn from_str(text: &str) -> Result<Self, ScalarError> {
        let ratio = parse_big_ratio(text)?;
        let num = num_traits::ToPrimitive::to_i64(ratio.numer())
            .filter(|n| n.abs() <= EXPONENT_LIMIT)
            .ok_or_else(|| ScalarError::Parse(text.to_owned()))?;
        let den = num_traits::ToPrimitive::to_i64(ratio.denom())
            .filter(|d| d.abs() <= EXPONENT_LIMIT)
            .ok_or_else(|| ScalarError::Parse(text.to_owned()))?;
        Exponent::new(num, den)
    }
}

/// Backend-specific summation strategy.
pub trait Accumulator<S> {
    fn add(&mut self, term: S);
    fn total(&self) -> S;
}

/// Neumaier-compensated (Kahan-Babuska) summation for the float backend.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl Accumulator<f64> for CompensatedSum {
    fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Plain exact summation for the rational backend.
#[derive(Debug, Clone)]
pub struct ExactSum(BigRational);

impl Default for ExactSum {
    fn default() -> Self {
        ExactSum(<BigRational as Zero>::zero())
    }
}

impl Accumulator<BigRational> for ExactSum {
    fn add(&mut self, term: BigRational) {
        self.0 += term;
    }

    fn total(&self) -> BigRational {
        self.0.clone()
    }
}

/// The arithmetic contract shared by both backends.
///
/// All operations are pure; values are immutable. `pow` is the only fallible
/// operation: the exact backend rejects fractional exponents, and neither
/// backend raises zero to a negative power. The convention `x^0 = 1` holds
/// for every `x`, including zero.
pub trait Scalar:
    Clone + PartialEq + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    type Accum: Accumulator<Self> + Default;

    const BACKEND: BackendKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    /// Exact value `num/den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact embedding of a finite f64 (every finite f64 is a dyadic rational).
    fn from_dyadic(x: f64) -> Self;
    /// Parses `"0.5"`, `"3/4"`, `"1e-3"`; the exact backend parses decimals
    /// and scientific notation exactly.
    fn parse(text: &str) -> Result<Self, ScalarError>;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn pow(&self, exponent: &Exponent) -> Result<Self, ScalarError>;

    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn accumulator() -> Self::Accum {
        Self::Accum::default()
    }

    /// Relative slack absorbed by verification verdicts in this backend.
    fn verify_tolerance() -> Self;
}

pub fn max_scalar<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

impl Scalar for f64 {
    type Accum = CompensatedSum;

    const BACKEND: BackendKind = BackendKind::Float;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        debug_assert!(den != 0);
        num as f64 / den as f64
    }

    fn from_dyadic(x: f64) -> Self {
        debug_assert!(x.is_finite());
        x
    }

    fn parse(text: &str) -> Result<Self, ScalarError> {
        let text = text.trim();
        let value = if text.contains('/') {
            num_traits::ToPrimitive::to_f64(&parse_big_ratio(text)?).unwrap_or(f64::NAN)
        } else {
            text.parse::<f64>().unwrap_or(f64::NAN)
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ScalarError::Parse(text.to_owned()))
        }
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn pow(&self, exponent: &Exponent) -> Result<Self, ScalarError> {
        if let Some(k) = exponent.as_integer() {
            if k == 0 {
                return Ok(1.0);
            }
            if k == 1 {
                return Ok(*self);
            }
            if *self == 0.0 && k < 0 {
                return Err(ScalarError::ZeroToNegativePower);
            }
            let k = i32::try_from(k).map_err(|_| ScalarError::ExponentOverflow(*exponent))?;
            Ok(f64::powi(*self, k))
        } else {
            if *self < 0.0 {
                return Err(ScalarError::NegativeBaseFractionalPower {
                    base: self.to_string(),
                    exponent: *exponent,
                });
            }
            if *self == 0.0 && exponent.is_negative() {
                return Err(ScalarError::ZeroToNegativePower);
            }
            Ok(f64::powf(*self, exponent.to_f64()))
        }
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn verify_tolerance() -> Self {
        1e-12
    }
}

impl Scalar for BigRational {
    type Accum = ExactSum;

    const BACKEND: BackendKind = BackendKind::Exact;

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_dyadic(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn parse(text: &str) -> Result<Self, ScalarError> {
        parse_big_ratio(text)
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn div(&self, rhs: &Self) -> Self {
        debug_assert!(!Zero::is_zero(rhs), "division by zero");
        self / rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn pow(&self, exponent: &Exponent) -> Result<Self, ScalarError> {
        let Some(k) = exponent.as_integer() else {
            return Err(ScalarError::NonIntegerExponent {
                exponent: *exponent,
            });
        };
        if k == 0 {
            return Ok(Self::one());
        }
        if Zero::is_zero(self) && k < 0 {
            return Err(ScalarError::ZeroToNegativePower);
        }
        let k = i32::try_from(k).map_err(|_| ScalarError::ExponentOverflow(*exponent))?;
        Ok(num_traits::Pow::pow(self, k))
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or_else(|| {
            if self.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    fn verify_tolerance() -> Self {
        <BigRational as Zero>::zero()
    }
}

/// Parses an exact rational from `"5"`, `"-3/4"`, `"0.25"`, or `"2.5e-3"`.
pub fn parse_big_ratio(text: &str) -> Result<BigRational, ScalarError> {
    let trimmed = text.trim();
    let err = || ScalarError::Parse(text.to_owned());
    if trimmed.is_empty() {
        return Err(err());
    }

    if let Some((num, den)) = trimmed.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exp10) = match trimmed.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err())?),
        None => (trimmed, 0),
    };

    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let digits: String = [int_part, frac_part].concat();
    let digits = if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(err());
    } else {
        digits
    };
    let numer = BigInt::from_str(&digits).map_err(|_| err())?;
    let scale = frac_part.len() as i32;

    let ten = BigInt::from(10);
    let shift = exp10 - scale;
    let value = if shift >= 0 {
        BigRational::from_integer(numer * ten.pow(shift as u32))
    } else {
        BigRational::new(numer, ten.pow((-shift) as u32))
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_parsing_and_arithmetic() {
        let half: Exponent = "1/2".parse().unwrap();
        assert!(!half.is_integer());
        assert_eq!(half.to_f64(), 0.5);
        assert_eq!("0.5".parse::<Exponent>().unwrap(), half);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::new(5, 2).unwrap());

        let p = Exponent::from_int(2);
        assert_eq!((p + Exponent::one()).as_integer(), Some(3));
        assert!(Exponent::new(1, 0).is_err());
    }

    #[test]
    fn float_pow_conventions() {
        let zero = 0.0f64;
        assert_eq!(zero.pow(&Exponent::from_int(0)).unwrap(), 1.0);
        assert_eq!(2.0f64.pow(&Exponent::from_int(1)).unwrap(), 2.0);
        assert_eq!(2.0f64.pow(&Exponent::from_int(10)).unwrap(), 1024.0);
        let sqrt = 2.0f64.pow(&Exponent::new(1, 2).unwrap()).unwrap();
        assert!((sqrt - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(matches!(
            (-1.0f64).pow(&Exponent::new(1, 2).unwrap()),
            Err(ScalarError::NegativeBaseFractionalPower { .. })
        ));
        assert!(matches!(
            0.0f64.pow(&Exponent::from_int(-1)),
            Err(ScalarError::ZeroToNegativePower)
        ));
    }

    #[test]
    fn exact_pow_rejects_fractional_exponents() {
        // Fully qualified: `Ratio` has an inherent integer `pow` as well.
        let two = BigRational::from_int(2);
        assert_eq!(
            Scalar::pow(&two, &Exponent::from_int(3)).unwrap(),
            BigRational::from_int(8)
        );
        assert_eq!(
            Scalar::pow(&two, &Exponent::from_int(-2)).unwrap(),
            BigRational::from_ratio(1, 4)
        );
        assert!(matches!(
            Scalar::pow(&two, &Exponent::new(1, 2).unwrap()),
            Err(ScalarError::NonIntegerExponent { .. })
        ));
    }

    #[test]
    fn exact_parse_is_exact() {
        assert_eq!(
            BigRational::parse("0.3").unwrap(),
            BigRational::from_ratio(3, 10)
        );
        assert_eq!(
            BigRational::parse("2.5e-3").unwrap(),
            BigRational::from_ratio(1, 400)
        );
        assert_eq!(
            BigRational::parse("-7/4").unwrap(),
            BigRational::from_ratio(-7, 4)
        );
        assert!(BigRational::parse("1/0").is_err());
        assert!(BigRational::parse("abc").is_err());
    }

    #[test]
    fn dyadic_embedding_is_exact() {
        let x = 0.1f64; // not 1/10, but some exact dyadic
        let r = BigRational::from_dyadic(x);
        assert_eq!(r.to_f64(), x);
        assert_ne!(r, BigRational::from_ratio(1, 10));
    }

    #[test]
    fn compensated_sum_beats_naive_on_cancellation() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        acc.add(1e-16);
        acc.add(1e-16);
        acc.add(-1.0);
        assert_eq!(acc.total(), 2e-16);
    }

    #[test]
    fn float_parse_accepts_fractions() {
        assert_eq!(f64::parse("1/2").unwrap(), 0.5);
        assert_eq!(f64::parse("0.25").unwrap(), 0.25);
        assert!(f64::parse("inf").is_err());
        assert!(f64::parse("").is_err());
    }
}
