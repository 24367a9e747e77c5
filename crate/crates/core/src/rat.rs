//! Exact rational numbers.
//!
//! Every probability, reward and value in the crate is a [`Rat`]. The type is
//! `num_rational::BigRational`, which is always kept in lowest terms with a
//! positive denominator.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// `2^exp` as an exact rational.
pub fn pow2(exp: u64) -> Rat {
    Rat::from_integer(BigInt::one() << exp)
}

/// `base^exp` for a possibly negative exponent. Panics on `0^negative`.
pub fn powi(base: &Rat, exp: i64) -> Rat {
    if exp >= 0 {
        num_traits::pow::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow::pow(base.recip(), exp.unsigned_abs() as usize)
    }
}

/// Canonical text form `p/q`, used by every file format and report.
pub fn fmt(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p/q` or a bare integer `p`.
pub fn parse(text: &str) -> Result<Rat> {
    let bad = || Error::InvalidArgument(format!("not a rational: {text:?}"));
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::InvalidArgument(format!("zero denominator in {text:?}")));
    }
    Ok(Rat::new(n, d))
}

/// Least integer strictly greater than `x`.
pub fn least_int_above(x: &Rat) -> BigInt {
    x.floor().to_integer() + BigInt::one()
}

/// `ceil(x)` as an integer.
pub fn ceil_int(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

pub fn in_unit_interval(p: &Rat) -> bool {
    !p.is_negative() && p <= &Rat::one()
}

/// Lossy conversion for human-facing summaries only.
pub fn approx_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
