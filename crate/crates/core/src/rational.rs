//! Exact rational values and their extension with infinities.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number, always kept in reduced form.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses an integer or decimal literal (`12`, `-3`, `0.25`, `.5`) exactly.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let (whole, fraction) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && fraction.is_empty() {
        return None;
    }
    if !whole.chars().chain(fraction.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{fraction}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), fraction.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Parses `a`, `a/b` or a decimal literal.
pub fn parse_rational(text: &str) -> Option<Rational> {
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => parse_decimal(text.trim()),
    }
}

/// Smallest integer not below `r`.
pub fn ceil_to_int(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

/// A rational extended with both infinities.
///
/// Relaxed planning uses `+∞` for variables that can be raised without bound
/// and `-∞` for "no requirement" thresholds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, ExtRational::PosInf)
    }

    /// Multiplication by a strictly positive rational.
    pub fn scale_pos(&self, c: &Rational) -> ExtRational {
        debug_assert!(c.is_positive());
        match self {
            ExtRational::Finite(r) => ExtRational::Finite(r * c),
            other => other.clone(),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtRational::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for &ExtRational {
    type Output = ExtRational;

    /// Addition with absorbing infinities. `+∞ + -∞` has no meaning for the
    /// planner and panics.
    fn add(self, rhs: &ExtRational) -> ExtRational {
        use ExtRational::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => panic!("undefined sum of opposite infinities"),
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::NegInf => write!(f, "-inf"),
            ExtRational::Finite(r) => write!(f, "{r}"),
            ExtRational::PosInf => write!(f, "inf"),
        }
    }
}

/// `true` if `r` is a whole number.
pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}
