use super::{refine_root, ExactError, Rational, RootInterval, UniPoly};
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number type accepted by the curvature formulas: exact rationals,
/// rational intervals, or plain floats.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(n.into()))
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        super::to_f64(r)
    }
}

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, ExactError> {
        if lo > hi {
            return Err(ExactError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn from_root(iv: &RootInterval) -> Self {
        Interval { lo: iv.lo.clone(), hi: iv.hi.clone() }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&Rational::zero())
    }

    /// Certified sign, `None` when the interval straddles zero.
    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    /// Largest absolute value attained.
    pub fn magnitude(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        if self.contains_zero() {
            return Err(ExactError::IntervalDivision);
        }
        let one = Rational::one();
        Ok(Interval { lo: &one / &self.hi, hi: &one / &self.lo })
    }

    pub fn square(&self) -> Self {
        let (a, b) = (&self.lo * &self.lo, &self.hi * &self.hi);
        if self.contains_zero() {
            Interval { lo: Rational::zero(), hi: a.max(b) }
        } else if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Rational enclosure of the square root of a nonnegative interval, each end
    /// within `eps` of the true value.
    pub fn sqrt(&self, eps: &Rational) -> Result<Self, ExactError> {
        if self.lo.is_negative() {
            return Err(ExactError::IntervalDivision);
        }
        let lo = sqrt_bracket(&self.lo, eps)?.lo;
        let hi = sqrt_bracket(&self.hi, eps)?.hi;
        Ok(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Self {
        Interval { lo: (&self.lo).min(&other.lo).clone(), hi: (&self.hi).max(&other.hi).clone() }
    }
}

/// Bracket of `sqrt(r)` for `r >= 0` of width at most `eps`.
pub fn sqrt_bracket(r: &Rational, eps: &Rational) -> Result<RootInterval, ExactError> {
    if r.is_zero() {
        return Ok(RootInterval::exact(Rational::zero(), 1));
    }
    let p = UniPoly::new(vec![-r.clone(), Rational::zero(), Rational::one()]);
    let hi = r.clone().max(Rational::one());
    if p.eval(&hi).is_zero() {
        return Ok(RootInterval::exact(hi, 1));
    }
    let iv = RootInterval { lo: Rational::zero(), hi, multiplicity: 1 };
    refine_root(&p, &iv, eps)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().cloned().unwrap();
        let hi = c.iter().max().cloned().unwrap();
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    /// Panics when the divisor contains zero; callers check positivity first.
    fn div(self, o: Interval) -> Interval {
        self * o.recip().expect("interval divisor contains zero")
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Scalar for Interval {
    fn from_rational(r: &Rational) -> Self {
        Interval::point(r.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn arithmetic_encloses() {
        let a = iv(int(-1), int(2));
        let b = iv(int(3), int(4));
        assert_eq!(a.clone() * b.clone(), iv(int(-4), int(8)));
        assert_eq!(a.clone() - b.clone(), iv(int(-5), int(-1)));
        assert_eq!(b.clone() / iv(int(1), int(2)), iv(rat(3, 2), int(4)));
        assert_eq!(a.square(), iv(int(0), int(4)));
        assert_eq!(a.sign(), None);
        assert_eq!(b.sign(), Some(1));
        assert!(a.recip().is_err());
        assert!(Interval::new(int(2), int(1)).is_err());
    }

    #[test]
    fn square_root_enclosure() {
        let eps = rat(1, 1_000_000_000);
        let s = Interval::point(int(2)).sqrt(&eps).unwrap();
        assert!(s.width() <= eps);
        assert!(s.lo() * s.lo() <= int(2) && s.hi() * s.hi() >= int(2));
        let s = Interval::point(rat(9, 4)).sqrt(&eps).unwrap();
        assert!(s.contains(&rat(3, 2)));
        let s = Interval::point(rat(1, 9)).sqrt(&eps).unwrap();
        assert!(s.contains(&rat(1, 3)));
    }
}
