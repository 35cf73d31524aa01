use super::{ExactError, Rational, UniPoly};
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Reduced quotient of two polynomials with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFn {
    num: UniPoly,
    den: UniPoly,
}

impl RationalFn {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::PolyDivision);
        }
        if num.is_zero() {
            return Ok(Self::from_poly(UniPoly::zero()));
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).expect("gcd divides");
        let den = den.div_exact(&g).expect("gcd divides");
        let l = den.leading();
        Ok(RationalFn { num: num.scale(&(Rational::one() / &l)), den: den.monic() })
    }

    /// Quotient `num / den` where every common factor of `num` and `den` divides
    /// `base`, which is cheap to test when `base` has small degree. Saves the
    /// full gcd for large `den = base^k`-type denominators.
    pub fn new_with_base(mut num: UniPoly, mut den: UniPoly, base: &UniPoly) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::PolyDivision);
        }
        if num.is_zero() {
            return Ok(Self::from_poly(UniPoly::zero()));
        }
        if !base.is_constant() && !base.is_zero() {
            loop {
                let (_, r) = num.div_rem(base)?;
                let h = if r.is_zero() { base.monic() } else { base.gcd(&r) };
                if h.is_constant() {
                    break;
                }
                let (_, r) = den.div_rem(&h)?;
                let h = if r.is_zero() { h } else { h.gcd(&r) };
                if h.is_constant() {
                    break;
                }
                num = num.div_exact(&h).expect("h divides num");
                den = den.div_exact(&h).expect("h divides den");
            }
        }
        let l = den.leading();
        Ok(RationalFn { num: num.scale(&(Rational::one() / &l)), den: den.monic() })
    }

    pub fn from_poly(p: UniPoly) -> Self {
        RationalFn { num: p, den: UniPoly::one() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_poly(UniPoly::constant(c))
    }

    pub fn numer(&self) -> &UniPoly {
        &self.num
    }

    pub fn denom(&self) -> &UniPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `None` where the denominator vanishes.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }

    pub fn recip(&self) -> Result<Self, ExactError> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, k: usize) -> Self {
        RationalFn { num: self.num.pow(k), den: self.den.pow(k) }
    }
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, o: &RationalFn) -> RationalFn {
        if self.den == o.den {
            return RationalFn::new(&self.num + &o.num, self.den.clone()).expect("nonzero denominator");
        }
        RationalFn::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
            .expect("nonzero denominator")
    }
}

impl Sub for &RationalFn {
    type Output = RationalFn;
    fn sub(self, o: &RationalFn) -> RationalFn {
        self + &(-o)
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, o: &RationalFn) -> RationalFn {
        RationalFn::new(&self.num * &o.num, &self.den * &o.den).expect("nonzero denominator")
    }
}

impl Div for &RationalFn {
    type Output = RationalFn;
    /// Panics on division by the zero function.
    fn div(self, o: &RationalFn) -> RationalFn {
        RationalFn::new(&self.num * &o.den, &self.den * &o.num).expect("division by zero function")
    }
}

impl Neg for &RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        RationalFn { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RationalFn {
            type Output = RationalFn;
            fn $m(self, o: RationalFn) -> RationalFn {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        -&self
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() && self.den.leading() == Rational::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl super::Scalar for RationalFn {
    fn from_rational(r: &Rational) -> Self {
        RationalFn::constant(r.clone())
    }
}

impl Default for RationalFn {
    fn default() -> Self {
        Self::constant(Rational::zero())
    }
}
