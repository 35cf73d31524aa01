use super::{sign, ExactError, Rational};
use num_traits::Zero;
use serde::Serialize;
use std::ops::{Add, Mul};

/// Discriminant and the three auxiliary invariants of `ax^4 + bx^3 + cx^2 + dx + e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuarticInvariants {
    pub delta: Rational,
    pub r: Rational,
    pub s: Rational,
    pub t: Rational,
}

/// Which sign rule decides the real roots of a quartic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarticRootRule {
    /// two distinct real roots and a conjugate pair
    DeltaNegative,
    /// four distinct real roots
    DeltaPositiveRNegSNeg,
    /// no real roots
    DeltaPositiveOtherwise,
    /// repeated root, at least one real
    DeltaZeroReal,
    /// two conjugate double roots
    DeltaZeroNoReal,
}

impl QuarticRootRule {
    pub fn has_real_root(self) -> bool {
        !matches!(self, Self::DeltaPositiveOtherwise | Self::DeltaZeroNoReal)
    }

    /// Number of distinct real roots when the rule determines it.
    pub fn distinct_real_roots(self) -> Option<usize> {
        match self {
            Self::DeltaNegative => Some(2),
            Self::DeltaPositiveRNegSNeg => Some(4),
            Self::DeltaPositiveOtherwise | Self::DeltaZeroNoReal => Some(0),
            Self::DeltaZeroReal => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::DeltaNegative => "delta<0",
            Self::DeltaPositiveRNegSNeg => "delta>0,R<0,S<0",
            Self::DeltaPositiveOtherwise => "delta>0,(R>=0|S>=0)",
            Self::DeltaZeroReal => "delta=0,real",
            Self::DeltaZeroNoReal => "delta=0,S>0,T=0,R=0",
        }
    }
}

impl QuarticInvariants {
    pub fn signs(&self) -> [i8; 4] {
        [sign(&self.delta), sign(&self.r), sign(&self.s), sign(&self.t)]
    }

    /// The classical sign rules. A vanishing discriminant with `S > 0` and `T = 0`
    /// has no real root only when `R = 0` as well; `x^4 + x^2` shows the other case.
    pub fn root_rule(&self) -> QuarticRootRule {
        let [dl, r, s, t] = self.signs();
        match dl {
            -1 => QuarticRootRule::DeltaNegative,
            1 if r < 0 && s < 0 => QuarticRootRule::DeltaPositiveRNegSNeg,
            1 => QuarticRootRule::DeltaPositiveOtherwise,
            _ if s > 0 && t == 0 && r == 0 => QuarticRootRule::DeltaZeroNoReal,
            _ => QuarticRootRule::DeltaZeroReal,
        }
    }
}

pub fn quartic_invariants(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    d: &Rational,
    e: &Rational,
) -> Result<QuarticInvariants, ExactError> {
    if a.is_zero() {
        return Err(ExactError::NotQuartic);
    }
    let [delta, r, s, t] = invariant_forms([a, b, c, d, e], |n| Rational::from_integer(n.into()));
    Ok(QuarticInvariants { delta, r, s, t })
}

type Monomial = (i64, [u8; 5]);

const DELTA_TERMS: [Monomial; 16] = [
    (256, [3, 0, 0, 0, 3]),
    (-192, [2, 1, 0, 1, 2]),
    (-128, [2, 0, 2, 0, 2]),
    (144, [2, 0, 1, 2, 1]),
    (-27, [2, 0, 0, 4, 0]),
    (144, [1, 2, 1, 0, 2]),
    (-6, [1, 2, 0, 2, 1]),
    (-80, [1, 1, 2, 1, 1]),
    (18, [1, 1, 1, 3, 0]),
    (16, [1, 0, 4, 0, 1]),
    (-4, [1, 0, 3, 2, 0]),
    (-27, [0, 4, 0, 0, 2]),
    (18, [0, 3, 1, 1, 1]),
    (-4, [0, 3, 0, 3, 0]),
    (-4, [0, 2, 3, 0, 1]),
    (1, [0, 2, 2, 2, 0]),
];
const R_TERMS: [Monomial; 5] =
    [(64, [3, 0, 0, 0, 1]), (-16, [2, 0, 2, 0, 0]), (16, [1, 2, 1, 0, 0]), (-16, [2, 1, 0, 1, 0]), (-3, [0, 4, 0, 0, 0])];
const S_TERMS: [Monomial; 2] = [(8, [1, 0, 1, 0, 0]), (-3, [0, 2, 0, 0, 0])];
const T_TERMS: [Monomial; 3] = [(1, [0, 3, 0, 0, 0]), (8, [2, 0, 0, 1, 0]), (-1, [1, 1, 1, 0, 0])];

/// `[Delta, R, S, T]` as forms in the coefficients, over any commutative ring.
/// They are homogeneous of degrees 6, 4, 2 and 3.
pub fn invariant_forms<T>(coeffs: [&T; 5], int: impl Fn(i64) -> T) -> [T; 4]
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    let powers: Vec<Vec<T>> = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![int(1)];
            for k in 1..=4 {
                let next = v[k - 1].clone() * (*c).clone();
                v.push(next);
            }
            v
        })
        .collect();
    let eval = |table: &[Monomial]| {
        table.iter().fold(int(0), |acc, (k, e)| {
            let term = (0..5).fold(int(*k), |t, i| t * powers[i][e[i] as usize].clone());
            acc + term
        })
    };
    [eval(&DELTA_TERMS), eval(&R_TERMS), eval(&S_TERMS), eval(&T_TERMS)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn pure_fourth_power() {
        let z = int(0);
        let inv = quartic_invariants(&int(1), &z, &z, &z, &z).unwrap();
        assert_eq!(inv.delta, z);
        assert_eq!(inv.s, z);
        assert_eq!(inv.t, z);
    }

    #[test]
    fn rejects_vanishing_leading_coefficient() {
        let z = int(0);
        assert_eq!(quartic_invariants(&z, &int(1), &z, &z, &z), Err(ExactError::NotQuartic));
    }

    #[test]
    fn discriminant_of_split_quartic() {
        // roots 1, 2, 3, 4: product of squared differences = (1*2*3*1*2*1)^2 = 144
        let inv = quartic_invariants(&int(1), &int(-10), &int(35), &int(-50), &int(24)).unwrap();
        assert_eq!(inv.delta, int(144));
        assert_eq!(inv.root_rule(), QuarticRootRule::DeltaPositiveRNegSNeg);
    }

    #[test]
    fn degenerate_rules() {
        let z = int(0);
        // x^4 + x^2 has the real double root 0
        let inv = quartic_invariants(&int(1), &z, &int(1), &z, &z).unwrap();
        assert_eq!(inv.delta, z);
        assert_eq!(inv.root_rule(), QuarticRootRule::DeltaZeroReal);
        // (x^2 + 1)^2
        let inv = quartic_invariants(&int(1), &z, &int(2), &z, &int(1)).unwrap();
        assert_eq!(inv.root_rule(), QuarticRootRule::DeltaZeroNoReal);
        let inv = quartic_invariants(&rat(1, 2), &z, &z, &z, &int(3)).unwrap();
        assert_eq!(inv.root_rule(), QuarticRootRule::DeltaPositiveOtherwise);
    }
}
