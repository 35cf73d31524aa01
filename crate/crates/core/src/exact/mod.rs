//! Exact rational arithmetic and univariate polynomial algebra.

mod interval;
mod intpoly;
mod poly;
mod quartic;
mod ratfn;
mod resultant;
mod roots;

pub use interval::{sqrt_bracket, Interval, Scalar};
pub use intpoly::{IntPoly, SturmChain};
pub use poly::UniPoly;
pub use quartic::{invariant_forms, quartic_invariants, QuarticInvariants, QuarticRootRule};
pub use ratfn::RationalFn;
pub use resultant::{resultant, BiPoly, Eliminate};
pub use roots::{
    isolate_real_roots, refine_root, sign_on_ray, square_free_decomposition, square_free_part, sturm_root_count,
    RootInterval,
};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

/// Alias used where a rational function of the family parameter is meant.
pub type ParamRationalFn = RationalFn;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("empty interval: lower end {lo} is not below upper end {hi}")]
    EmptyInterval { lo: String, hi: String },
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("root of multiplicity {0} cannot be refined by sign changes")]
    MultipleRoot(usize),
    #[error("interval [{lo}, {hi}] does not bracket a sign change")]
    NoSignChange { lo: String, hi: String },
    #[error("both polynomials are constant in the eliminated variable")]
    ConstantResultant,
    #[error("leading coefficient is zero, not a quartic")]
    NotQuartic,
    #[error("division by an interval containing zero")]
    IntervalDivision,
    #[error("division by the zero polynomial")]
    PolyDivision,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Builds `num/den`; panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `N`, `N/D`, or a plain decimal such as `0.125` exactly.
pub fn parse_rational(s: &str) -> Result<Rational, ExactError> {
    let t = s.trim();
    let err = || ExactError::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        let whole: BigInt = if ip.is_empty() { BigInt::zero() } else { ip.parse().map_err(|_| err())? };
        let frac: BigInt = fp.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let v = Rational::new(whole * &scale + frac, scale);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Best dyadic-free rational approximation of a finite float (exact binary value).
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Exact `p/q` rendering.
pub fn fraction_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds `r` to `digits` places after the decimal point, half away from zero.
pub fn decimal_string(r: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = r.abs() * Rational::from_integer(scale);
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let mut s = rounded.to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    if r.is_negative() && rounded.is_positive() {
        s.insert(0, '-');
    }
    s
}

pub fn sign(r: &Rational) -> i8 {
    match r.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// Smallest power of two that is at least `r` (for `r > 0`).
pub(crate) fn pow2_at_least(r: &Rational) -> Rational {
    let mut p = Rational::one();
    let two = int(2);
    while &p < r {
        p *= &two;
    }
    p
}
