use super::{Rational, UniPoly};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Integer polynomial used for sign-sensitive work (gcd, Sturm chains).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

fn trim(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

impl IntPoly {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        IntPoly { coeffs: trim(coeffs) }
    }

    /// Positive multiple of `p` with coprime integer coefficients.
    pub fn from_rational(p: &UniPoly) -> Self {
        let l = p
            .coeffs()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let v = p
            .coeffs()
            .iter()
            .map(|c| c.numer() * (&l / c.denom()))
            .collect();
        IntPoly::new(v).primitive()
    }

    pub fn to_rational(&self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the (positive) content, keeping the sign of every value.
    pub fn primitive(&self) -> Self {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    pub fn neg(&self) -> Self {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn derivative(&self) -> Self {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// Pseudo-remainder `lc(b)^(deg a - deg b + 1) * a mod b`.
    pub fn prem(&self, b: &IntPoly) -> IntPoly {
        let db = b.degree().expect("pseudo-division by zero polynomial");
        let Some(da) = self.degree() else {
            return self.clone();
        };
        if da < db {
            return self.clone();
        }
        let lb = b.leading();
        let mut r = self.coeffs.clone();
        let mut k = da;
        loop {
            if r.len() > k && !r[k].is_zero() {
                let lr = r[k].clone();
                for c in r.iter_mut() {
                    *c *= &lb;
                }
                let shift = k - db;
                for (j, bc) in b.coeffs.iter().enumerate() {
                    r[shift + j] -= &lr * bc;
                }
            } else {
                for c in r.iter_mut() {
                    *c *= &lb;
                }
            }
            if k == db {
                break;
            }
            k -= 1;
        }
        r.truncate(db);
        IntPoly::new(r)
    }

    /// Primitive greatest common divisor with positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.prem(&b).primitive();
            a = b;
            b = r;
        }
        if a.leading().is_negative() {
            a = a.neg();
        }
        a
    }

    /// Sign of the value at `x`, computed with integer arithmetic only.
    pub fn sign_at(&self, x: &Rational) -> i8 {
        let p = x.numer();
        let q = x.denom();
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if i + 1 == self.coeffs.len() {
                acc = c.clone();
            } else {
                qpow *= q;
                acc = acc * p + c * &qpow;
            }
        }
        sign_of(&acc)
    }

    /// Sign for `x -> +inf` (`positive`) or `x -> -inf`.
    pub fn sign_at_infinity(&self, positive: bool) -> i8 {
        let Some(d) = self.degree() else { return 0 };
        let s = sign_of(&self.leading());
        if positive || d % 2 == 0 {
            s
        } else {
            -s
        }
    }

    pub fn sturm_chain(&self) -> SturmChain {
        SturmChain::new(self)
    }

    /// Cauchy-type bound: every real root has absolute value below the result.
    pub fn root_bound(&self) -> Rational {
        let l = Rational::from_integer(self.leading().abs());
        let m = self
            .coeffs
            .iter()
            .take(self.coeffs.len().saturating_sub(1))
            .map(|c| Rational::from_integer(c.abs()))
            .max()
            .unwrap_or_else(Rational::zero);
        Rational::one() + m / l
    }
}

fn sign_of(v: &BigInt) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm sequence of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    seq: Vec<IntPoly>,
}

impl SturmChain {
    fn new(p: &IntPoly) -> Self {
        let mut seq = vec![p.primitive()];
        let d = p.derivative().primitive();
        if !d.is_zero() {
            seq.push(d);
        }
        while seq.len() >= 2 {
            let a = &seq[seq.len() - 2];
            let b = &seq[seq.len() - 1];
            if b.degree() == Some(0) {
                break;
            }
            let r = a.prem(b);
            if r.is_zero() {
                break;
            }
            let db = b.degree().unwrap();
            let da = a.degree().unwrap();
            let flip = b.leading().is_negative() && (da - db + 1) % 2 == 1;
            let next = if flip { r } else { r.neg() };
            seq.push(next.primitive());
        }
        SturmChain { seq }
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    fn variations(signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut v = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        Self::variations(self.seq.iter().map(|p| p.sign_at(x)))
    }

    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        Self::variations(self.seq.iter().map(|p| p.sign_at_infinity(positive)))
    }

    /// Distinct roots in `(lo, hi]`.
    pub fn count_between(&self, lo: &Rational, hi: &Rational) -> usize {
        self.variations_at(lo).saturating_sub(self.variations_at(hi))
    }

    /// Distinct roots in `(lo, +inf)`.
    pub fn count_above(&self, lo: &Rational) -> usize {
        self.variations_at(lo).saturating_sub(self.variations_at_infinity(true))
    }

    /// Distinct real roots.
    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false).saturating_sub(self.variations_at_infinity(true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn sign_evaluation_matches_rational_eval() {
        let p = UniPoly::from_i64(&[3, -7, 0, 2]);
        let ip = IntPoly::from_rational(&p);
        for x in [rat(-5, 2), rat(1, 3), int(0), rat(7, 4), int(2)] {
            assert_eq!(ip.sign_at(&x), crate::exact::sign(&p.eval(&x)));
        }
    }

    #[test]
    fn gcd_of_integer_polynomials() {
        let a = IntPoly::from_rational(&UniPoly::from_roots(&[int(1), rat(2, 3), int(-4)]));
        let b = IntPoly::from_rational(&UniPoly::from_roots(&[rat(2, 3), int(-4), int(9)]));
        let g = a.gcd(&b);
        assert_eq!(g.to_rational().monic(), UniPoly::from_roots(&[rat(2, 3), int(-4)]));
    }

    #[test]
    fn sturm_counts() {
        let p = IntPoly::from_rational(&UniPoly::from_roots(&[int(1), int(2), int(3)]));
        let s = p.sturm_chain();
        assert_eq!(s.count_between(&int(0), &int(10)), 3);
        assert_eq!(s.count_between(&int(1), &int(2)), 1);
        assert_eq!(s.count_between(&int(0), &int(1)), 1);
        assert_eq!(s.count_all(), 3);
        let q = IntPoly::from_rational(&UniPoly::from_i64(&[1, 0, 1]));
        assert_eq!(q.sturm_chain().count_all(), 0);
    }

    #[test]
    fn negative_leading_coefficients() {
        let p = IntPoly::from_rational(&UniPoly::from_i64(&[2, 0, 0, -1]).scale(&int(-3)));
        assert_eq!(p.sturm_chain().count_all(), 1);
        let q = IntPoly::from_rational(&UniPoly::from_roots(&[int(-2), int(5)]).scale(&int(-7)));
        assert_eq!(q.sturm_chain().count_all(), 2);
        assert_eq!(q.sturm_chain().count_above(&int(0)), 1);
    }
}
