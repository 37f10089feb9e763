//! Exact rational values.
//!
//! All game values, payoffs, and intermediate quantities are
//! arbitrary-precision rationals kept in lowest terms with a positive
//! denominator. `num_rational::BigRational` already guarantees both
//! invariants, so it is used directly as the value type.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Integer as a rational.
pub fn rat(k: i64) -> Rational {
    Rational::from_integer(BigInt::from(k))
}

/// `p/q` as a rational, reduced. Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty value")]
    Empty,
    #[error("invalid rational `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"k"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), Some(q.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_str
        .parse()
        .map_err(|_| ParseRationalError::Invalid(s.to_string()))?;
    let denom: BigInt = match den_str {
        Some(q) => q
            .parse()
            .map_err(|_| ParseRationalError::Invalid(s.to_string()))?,
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(numer, denom))
}
