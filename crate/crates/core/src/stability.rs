//! Second variation of the scalar curvature at diagonal Einstein metrics.

use crate::curvature::CertifiedMetric;
use crate::einstein::residual_tolerance;
use crate::exact::{Interval, Rational, Scalar};
use crate::spaces::AlignedSpace;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("{name}: metric is not Einstein (residual bound {residual})")]
    NotEinstein { name: String, residual: String },
    #[error("{name}: metric entries must be positive")]
    NonPositive { name: String },
}

/// Symmetric matrix with entries `scaled[i][j] * sqrt(w_i w_j)`, `w = (n1, n2, d)`.
///
/// Every entry of `L` has this form with `scaled` rational in the metric, so
/// the identity `L (sqrt n1, sqrt n2, sqrt d) = 0` becomes `scaled * w = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledMatrix<T> {
    pub scaled: [[T; 3]; 3],
    pub weights: [i64; 3],
}

impl<T: Scalar> ScaledMatrix<T> {
    /// `scaled * w`, which vanishes exactly when `L` kills `(sqrt n1, sqrt n2, sqrt d)`.
    pub fn kernel_defect(&self) -> [T; 3] {
        let w = self.weights.map(T::from_int);
        std::array::from_fn(|i| {
            self.scaled[i][0].clone() * w[0].clone()
                + self.scaled[i][1].clone() * w[1].clone()
                + self.scaled[i][2].clone() * w[2].clone()
        })
    }

    /// Diagonal entry `L_ii`.
    pub fn diagonal(&self, i: usize) -> T {
        self.scaled[i][i].clone() * T::from_int(self.weights[i])
    }

    pub fn trace(&self) -> T {
        self.diagonal(0) + self.diagonal(1) + self.diagonal(2)
    }

    /// Sum of the principal 2x2 minors; `L_ij^2 = scaled_ij^2 w_i w_j` keeps it rational.
    pub fn minor_sum(&self) -> T {
        let mut acc = T::from_int(0);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let p = &self.scaled;
            let ww = T::from_int(self.weights[i] * self.weights[j]);
            acc = acc + (p[i][i].clone() * p[j][j].clone() - p[i][j].clone() * p[i][j].clone()) * ww;
        }
        acc
    }
}

impl ScaledMatrix<Rational> {
    pub fn to_f64(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                crate::exact::to_f64(&self.scaled[i][j]) * ((self.weights[i] * self.weights[j]) as f64).sqrt()
            })
        })
    }
}

impl ScaledMatrix<Interval> {
    pub fn midpoint(&self) -> ScaledMatrix<Rational> {
        ScaledMatrix { scaled: self.scaled.clone().map(|r| r.map(|e| e.midpoint())), weights: self.weights }
    }
}

/// The matrix `L` with `Hess(scal) = 2 rho I - L`, evaluated at `x = (x1, x2, .)`.
pub fn hessian_l_generic<T: Scalar>(s: &AlignedSpace, x: &[T; 3]) -> ScaledMatrix<T> {
    let k = s.constants();
    let one = Rational::one();
    let n1 = Rational::from_integer(s.n1.into());
    let n2 = Rational::from_integer(s.n2.into());
    let d = Rational::from_integer(s.d.into());
    let u = (&k.c1 - &one) * &k.k1 / &k.c1;
    let v = &k.k2 / &k.c1;
    let x1s = x[0].clone() * x[0].clone();
    let x2s = x[1].clone() * x[1].clone();
    let c = |r: Rational| T::from_rational(&r);
    let zero = T::from_int(0);
    let p11 = c(&u / &n1) / x1s.clone();
    let p22 = c(&v / &n2) / x2s.clone();
    let p13 = -(c(&u / &d) / x1s.clone());
    let p23 = -(c(&v / &d) / x2s.clone());
    let p33 = (c(&v * &n2) * x1s.clone() + c(&u * &n1) * x2s.clone()) / (c(&d * &d) * x1s * x2s);
    ScaledMatrix {
        scaled: [[p11, zero.clone(), p13.clone()], [zero, p22, p23.clone()], [p13, p23, p33]],
        weights: [s.n1, s.n2, s.d],
    }
}

pub fn hessian_l(s: &AlignedSpace, g: &crate::curvature::DiagonalMetric) -> ScaledMatrix<Rational> {
    hessian_l_generic(s, &g.entries())
}

/// `rho = (c1 (2 kappa2 + 1) x2 - 2 kappa2) / (4 c1 x2^2)`, the eigenvalue `r2` at `x3 = 1`.
pub fn einstein_constant<T: Scalar>(s: &AlignedSpace, x2: &T) -> T {
    let k = s.constants();
    let two = Rational::from_integer(2.into());
    let t2 = &two * &k.k2 + Rational::one();
    let num = T::from_rational(&(&k.c1 * &t2)) * x2.clone() - T::from_rational(&(&two * &k.k2));
    num / (T::from_rational(&(Rational::from_integer(4.into()) * &k.c1)) * x2.clone() * x2.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
/// `Unstable` rests on `2 rho - L22 > 0`; `Saddle` additionally on `2 rho - L33 < 0`
/// for a torus. The tangent signs in the report may refine either.
pub enum StabilityVerdict {
    Unstable,
    Saddle,
    Undetermined,
}

impl StabilityVerdict {
    pub fn label(self) -> &'static str {
        match self {
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Saddle => "saddle",
            StabilityVerdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub rho: Interval,
    pub l: ScaledMatrix<Interval>,
    /// Signs of the eigenvalues of `2 rho I - L`, descending, when certified.
    pub eigen_signs: Option<[i8; 3]>,
    /// Signs on the complement of `(sqrt n1, sqrt n2, sqrt d)`, descending.
    pub tangent_signs: Option<[i8; 2]>,
    /// Sign of `2 rho - L22`.
    pub witness_l22: Option<i8>,
    /// Sign of `2 rho - L33`.
    pub witness_l33: Option<i8>,
    pub verdict: StabilityVerdict,
}

/// Signs of the restricted Hessian from its trace and determinant.
fn tangent_signs(sum: &Interval, product: &Interval) -> Option<[i8; 2]> {
    match product.sign()? {
        -1 => Some([1, -1]),
        1 => match sum.sign()? {
            1 => Some([1, 1]),
            -1 => Some([-1, -1]),
            _ => None,
        },
        _ => match sum.sign()? {
            0 => Some([0, 0]),
            s => Some(if s > 0 { [s, 0] } else { [0, s] }),
        },
    }
}

/// Certified instability data at an Einstein metric, after rescaling to `x3 = 1`.
pub fn instability_certificate(s: &AlignedSpace, g: &CertifiedMetric) -> Result<StabilityReport, StabilityError> {
    if [&g.x1, &g.x2, &g.x3].iter().any(|x| x.sign() != Some(1)) {
        return Err(StabilityError::NonPositive { name: s.name.clone() });
    }
    let x3 = g.x3.clone();
    let x = [g.x1.clone() / x3.clone(), g.x2.clone() / x3.clone(), Interval::point(Rational::one())];
    let unit = CertifiedMetric { x1: x[0].clone(), x2: x[1].clone(), x3: x[2].clone() };
    let (a, b) = crate::curvature::einstein_residual_bounds(s, &unit);
    let residual = a.magnitude().max(b.magnitude());
    if residual > residual_tolerance() {
        return Err(StabilityError::NotEinstein { name: s.name.clone(), residual: crate::exact::decimal_string(&residual, 3) });
    }
    let rho = einstein_constant(s, &x[1]);
    let l = hessian_l_generic(s, &x);
    let two_rho = Interval::point(Rational::from_integer(2.into())) * rho.clone();
    let witness_l22 = (two_rho.clone() - l.diagonal(1)).sign();
    let witness_l33 = (two_rho.clone() - l.diagonal(2)).sign();
    let tr = l.trace();
    let sum = two_rho.clone() + two_rho.clone() - tr.clone();
    let product = two_rho.clone() * two_rho.clone() - two_rho.clone() * tr + l.minor_sum();
    let tangent = tangent_signs(&sum, &product);
    let eigen_signs = match (two_rho.sign(), tangent) {
        (Some(r), Some([t1, t2])) => {
            let mut v = [r, t1, t2];
            v.sort_unstable_by(|a, b| b.cmp(a));
            Some(v)
        }
        _ => None,
    };
    let tangent_positive = tangent.is_some_and(|t| t[0] > 0);
    let verdict = match (witness_l22, witness_l33) {
        (Some(1), Some(-1)) if s.is_abelian() => StabilityVerdict::Saddle,
        (Some(1), _) => StabilityVerdict::Unstable,
        _ if tangent_positive => StabilityVerdict::Unstable,
        _ => StabilityVerdict::Undetermined,
    };
    Ok(StabilityReport { rho, l, eigen_signs, tangent_signs: tangent, witness_l22, witness_l33, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{ricci_closed_form, DiagonalMetric};
    use crate::einstein::{default_eps, solve};
    use crate::exact::{int, rat};
    use num_traits::Zero;

    fn ex21() -> AlignedSpace {
        AlignedSpace::semisimple("ex21", 11, 7, 3, rat(1, 56), rat(1, 15)).unwrap()
    }

    #[test]
    fn kernel_identity_off_shell() {
        let g = DiagonalMetric::new(rat(3, 7), rat(9, 4), rat(5, 3)).unwrap();
        let l = hessian_l(&ex21(), &g);
        assert!(l.kernel_defect().iter().all(|v| v.is_zero()));
        let f = l.to_f64();
        let w = [11f64.sqrt(), 7f64.sqrt(), 3f64.sqrt()];
        for (i, row) in f.iter().enumerate() {
            assert!((row[0] * w[0] + row[1] * w[1] + row[2] * w[2]).abs() < 1e-12);
            for j in 0..3 {
                assert_eq!(row[j], f[j][i]);
            }
        }
    }

    #[test]
    fn diagonal_ratio_at_standard_metric() {
        let s = AlignedSpace::semisimple("eq", 6, 6, 4, rat(1, 4), rat(1, 4)).unwrap();
        let c1 = s.constants().c1;
        let l = hessian_l(&s, &DiagonalMetric::standard());
        assert_eq!(l.diagonal(0), l.diagonal(1) * (&c1 - int(1)));
    }

    #[test]
    fn example_metrics_are_unstable() {
        let s = ex21();
        let v = solve(&s, &default_eps()).unwrap();
        for m in &v.metrics {
            let r = instability_certificate(&s, &m.metric).unwrap();
            assert_eq!(r.witness_l22, Some(1));
            assert_eq!(r.verdict, StabilityVerdict::Unstable);
            let ric = ricci_closed_form(&s, &m.metric.entries());
            for e in &ric {
                assert!(!(e.hi() < r.rho.lo() || r.rho.hi() < e.lo()));
            }
            assert!(r.tangent_signs.unwrap().contains(&1));
        }
    }

    #[test]
    fn torus_example_is_saddle() {
        let s = AlignedSpace::abelian("ex48", 20, 24, 4, int(2), rat(1, 5), rat(1, 6)).unwrap();
        let v = solve(&s, &default_eps()).unwrap();
        let r = instability_certificate(&s, &v.metrics[0].metric).unwrap();
        assert_eq!(r.witness_l33, Some(-1));
        assert_eq!(r.tangent_signs, Some([1, -1]));
        assert_eq!(r.verdict, StabilityVerdict::Saddle);
    }

    #[test]
    fn rejects_non_einstein_metric() {
        let g = CertifiedMetric { x1: Interval::point(int(1)), x2: Interval::point(int(1)), x3: Interval::point(int(1)) };
        assert!(matches!(instability_certificate(&ex21(), &g), Err(StabilityError::NotEinstein { .. })));
    }

    #[test]
    fn rescaled_metric_gives_same_verdict() {
        let s = ex21();
        let v = solve(&s, &default_eps()).unwrap();
        let m = &v.metrics[1].metric;
        let t = Interval::point(rat(7, 3));
        let scaled = CertifiedMetric { x1: m.x1.clone() * t.clone(), x2: m.x2.clone() * t.clone(), x3: m.x3.clone() * t };
        let a = instability_certificate(&s, m).unwrap();
        let b = instability_certificate(&s, &scaled).unwrap();
        assert_eq!((a.verdict, a.tangent_signs), (b.verdict, b.tangent_signs));
    }
}
