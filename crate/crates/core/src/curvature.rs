//! Structural constants, Ricci eigenvalues, scalar curvature and plotting
//! grids for diagonal metrics `g = (x1, x2, x3)`.

use crate::exact::{Interval, Rational, Scalar};
use crate::spaces::AlignedSpace;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("metric entry x{index} = {value} is not positive")]
    NonPositive { index: usize, value: String },
    #[error("range [{lo}, {hi}] must be positive and ordered")]
    BadRange { lo: f64, hi: f64 },
    #[error("a grid needs at least 2 steps per axis, got {0}")]
    BadSteps(usize),
}

/// Invariant metric scaling the three isotropy summands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalMetric {
    pub x1: Rational,
    pub x2: Rational,
    pub x3: Rational,
}

impl DiagonalMetric {
    pub fn new(x1: Rational, x2: Rational, x3: Rational) -> Result<Self, CurvatureError> {
        for (i, x) in [&x1, &x2, &x3].into_iter().enumerate() {
            if !x.is_positive() {
                return Err(CurvatureError::NonPositive { index: i + 1, value: x.to_string() });
            }
        }
        Ok(DiagonalMetric { x1, x2, x3 })
    }

    /// The metric induced by minus the Killing form.
    pub fn standard() -> Self {
        DiagonalMetric { x1: Rational::one(), x2: Rational::one(), x3: Rational::one() }
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        DiagonalMetric { x1: &self.x1 * t, x2: &self.x2 * t, x3: &self.x3 * t }
    }

    pub fn entries(&self) -> [Rational; 3] {
        [self.x1.clone(), self.x2.clone(), self.x3.clone()]
    }
}

/// Metric whose entries are known to lie in rational intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedMetric {
    pub x1: Interval,
    pub x2: Interval,
    pub x3: Interval,
}

impl CertifiedMetric {
    pub fn midpoint(&self) -> DiagonalMetric {
        DiagonalMetric { x1: self.x1.midpoint(), x2: self.x2.midpoint(), x3: self.x3.midpoint() }
    }

    pub fn entries(&self) -> [Interval; 3] {
        [self.x1.clone(), self.x2.clone(), self.x3.clone()]
    }

    pub fn to_f64(&self) -> [f64; 3] {
        let m = self.midpoint();
        [crate::exact::to_f64(&m.x1), crate::exact::to_f64(&m.x2), crate::exact::to_f64(&m.x3)]
    }

    pub fn max_width(&self) -> Rational {
        self.x1.width().max(self.x2.width()).max(self.x3.width())
    }
}

/// The nonzero structural constants `[111], [222], [333], [113], [223]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralConstants {
    pub t111: Rational,
    pub t222: Rational,
    pub t333: Rational,
    pub t113: Rational,
    pub t223: Rational,
}

pub fn structural_constants(s: &AlignedSpace) -> StructuralConstants {
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let n1 = Rational::from_integer(s.n1.into());
    let n2 = Rational::from_integer(s.n2.into());
    let d = Rational::from_integer(s.d.into());
    let c1m = &k.c1 - &one;
    let t333 = if k.lambda.is_zero() {
        Rational::zero()
    } else {
        let c2m = &k.c1 - &two;
        &c2m * &c2m * &k.lambda * &d / &c1m
    };
    StructuralConstants {
        t111: (&one - &two * &k.k1) * &n1,
        t222: (&one - &two * &k.k2) * &n2,
        t333,
        t113: &c1m * &k.k1 * &n1 / &k.c1,
        t223: &k.k2 * &n2 / &k.c1,
    }
}

fn c<T: Scalar>(r: &Rational) -> T {
    T::from_rational(r)
}

fn sq<T: Scalar>(x: &T) -> T {
    x.clone() * x.clone()
}

/// Ricci eigenvalues in closed form, in terms of `c1, lambda, kappa1, kappa2`.
pub fn ricci_closed_form<T: Scalar>(s: &AlignedSpace, x: &[T; 3]) -> [T; 3] {
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let [x1, x2, x3] = x;
    let c1m = &k.c1 - &one;
    let r1 = c::<T>(&((&one + &two * &k.k1) / &four)) / x1.clone()
        - c::<T>(&(&c1m * &k.k1 / (&two * &k.c1))) * x3.clone() / sq(x1);
    let r2 = c::<T>(&((&one + &two * &k.k2) / &four)) / x2.clone()
        - c::<T>(&(&k.k2 / (&two * &k.c1))) * x3.clone() / sq(x2);
    let one_m = &one - &k.c1 * &k.lambda;
    let c2m = &k.c1 - &two;
    let a3 = &one / &two
        - &c1m * &one_m / (&two * &k.c1)
        - (&c1m - &k.c1 * &k.lambda) / (&two * &k.c1 * &c1m)
        - &c2m * &c2m * &k.lambda / (&four * &c1m);
    let b1 = &c1m * &one_m / (&four * &k.c1);
    let b2 = (&c1m - &k.c1 * &k.lambda) / (&four * &k.c1 * &c1m);
    let r3 = c::<T>(&a3) / x3.clone() + c::<T>(&b1) * x3.clone() / sq(x1) + c::<T>(&b2) * x3.clone() / sq(x2);
    [r1, r2, r3]
}

/// Ricci eigenvalues written through the Casimir constants and `lambda`,
/// as in the general formula for aligned spaces.
pub fn ricci_casimir_form<T: Scalar>(s: &AlignedSpace, x: &[T; 3]) -> [T; 3] {
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let [x1, x2, x3] = x;
    let c1m = &k.c1 - &one;
    let half = c::<T>(&(&one / &two));
    let quarter = c::<T>(&(&one / &four));
    let r1 = half.clone() / x1.clone() * (T::from_int(1) - c::<T>(&(&c1m / &k.c1)) * x3.clone() / x1.clone()) * c(&k.k1)
        + quarter.clone() / x1.clone();
    let r2 = half / x2.clone() * (T::from_int(1) - x3.clone() / (c::<T>(&k.c1) * x2.clone())) * c(&k.k2)
        + quarter / x2.clone();
    let x3sq = sq(x3);
    let lam_part = c::<T>(&(&k.c1 * &k.c1 / (&c1m * &c1m))) - x3sq.clone() / sq(x1)
        - x3sq.clone() / (c::<T>(&(&c1m * &c1m)) * sq(x2));
    let rest = x3sq.clone() / (c::<T>(&k.c1) * sq(x1)) + x3sq / (c::<T>(&(&k.c1 * &c1m)) * sq(x2));
    let r3 = c::<T>(&(&c1m * &k.lambda / &four)) / x3.clone() * lam_part + c::<T>(&(&c1m / &four)) / x3.clone() * rest;
    [r1, r2, r3]
}

/// Ricci eigenvalues from the structural constants through the general
/// formula for a metric diagonal in an orthogonal decomposition.
pub fn ricci_structural<T: Scalar>(s: &AlignedSpace, x: &[T; 3]) -> [T; 3] {
    let t = structural_constants(s);
    let [x1, x2, x3] = x;
    let n1 = Rational::from_integer(s.n1.into());
    let n2 = Rational::from_integer(s.n2.into());
    let d = Rational::from_integer(s.d.into());
    let two = Rational::from_integer(2.into());
    let four = Rational::from_integer(4.into());
    let half = T::from_rational(&(Rational::one() / &two));
    let r1 = half.clone() / x1.clone()
        - c::<T>(&(&t.t111 / (&four * &n1))) / x1.clone()
        - c::<T>(&(&t.t113 / (&two * &n1))) * x3.clone() / sq(x1);
    let r2 = half.clone() / x2.clone()
        - c::<T>(&(&t.t222 / (&four * &n2))) / x2.clone()
        - c::<T>(&(&t.t223 / (&two * &n2))) * x3.clone() / sq(x2);
    let two_t: T = T::from_int(2);
    let r3 = half / x3.clone()
        - c::<T>(&(&t.t113 / (&four * &d))) * (two_t.clone() / x3.clone() - x3.clone() / sq(x1))
        - c::<T>(&(&t.t223 / (&four * &d))) * (two_t / x3.clone() - x3.clone() / sq(x2))
        - c::<T>(&(&t.t333 / (&four * &d))) / x3.clone();
    [r1, r2, r3]
}

/// Exact Ricci eigenvalues `(r1, r2, r3)` on `p1, p2, p3`.
pub fn ricci_eigenvalues(s: &AlignedSpace, g: &DiagonalMetric) -> [Rational; 3] {
    ricci_closed_form(s, &g.entries())
}

/// `(r1 - r2, r2 - r3)`; both vanish exactly at Einstein metrics.
pub fn einstein_residual(s: &AlignedSpace, g: &DiagonalMetric) -> (Rational, Rational) {
    let [r1, r2, r3] = ricci_eigenvalues(s, g);
    (&r1 - &r2, r2 - r3)
}

/// Residual enclosure over a certified metric.
pub fn einstein_residual_bounds(s: &AlignedSpace, g: &CertifiedMetric) -> (Interval, Interval) {
    let [r1, r2, r3] = ricci_closed_form(s, &g.entries());
    (r1 - r2.clone(), r2 - r3)
}

/// `n1 r1 + n2 r2 + d r3`.
pub fn scalar_curvature_generic<T: Scalar>(s: &AlignedSpace, x: &[T; 3]) -> T {
    let [r1, r2, r3] = ricci_closed_form(s, x);
    T::from_int(s.n1) * r1 + T::from_int(s.n2) * r2 + T::from_int(s.d) * r3
}

pub fn scalar_curvature(s: &AlignedSpace, g: &DiagonalMetric) -> Rational {
    scalar_curvature_generic(s, &g.entries())
}

/// `x3` making `x1^n1 x2^n2 x3^d = 1`, computed through logarithms.
pub fn unit_volume_x3(s: &AlignedSpace, x1: f64, x2: f64) -> f64 {
    (-(s.n1 as f64 * x1.ln() + s.n2 as f64 * x2.ln()) / s.d as f64).exp()
}

/// Scalar curvature on the unit-volume slice as a function of `(x1, x2)`.
pub fn unit_volume_scal(s: &AlignedSpace, x1: f64, x2: f64) -> f64 {
    let x3 = unit_volume_x3(s, x1, x2);
    scalar_curvature_generic(s, &[x1, x2, x3])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandscapePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub scal: f64,
}

fn axis(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CurvatureError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(CurvatureError::BadRange { lo, hi });
    }
    match steps {
        0 => Err(CurvatureError::BadSteps(0)),
        1 if lo == hi => Ok(vec![lo]),
        1 => Err(CurvatureError::BadSteps(1)),
        _ => Ok((0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()),
    }
}

/// Scalar curvature on a `steps x steps` grid over `x1_range x x2_range` on the
/// unit-volume slice, row-major with `x1` as the row index. A single step is
/// accepted only for a degenerate range.
pub fn landscape_grid(
    s: &AlignedSpace,
    x1_range: (f64, f64),
    x2_range: (f64, f64),
    steps: usize,
) -> Result<Vec<LandscapePoint>, CurvatureError> {
    let xs = axis(x1_range.0, x1_range.1, steps)?;
    let ys = axis(x2_range.0, x2_range.1, steps)?;
    let cols = ys.len();
    Ok((0..xs.len() * cols)
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = (xs[idx / cols], ys[idx % cols]);
            let x3 = unit_volume_x3(s, x1, x2);
            LandscapePoint { x1, x2, x3, scal: scalar_curvature_generic(s, &[x1, x2, x3]) }
        })
        .collect())
}

/// Twelve significant digits, positional for moderate exponents.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v:.11e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let t = format!("{v:.decimals$}");
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{exp}")
    }
}

/// Writes `x1,x2,x3,scal` rows with 12 significant digits, then one `#` line per comment.
pub fn write_landscape_csv<W: Write + ?Sized>(w: &mut W, points: &[LandscapePoint], comments: &[String]) -> std::io::Result<()> {
    writeln!(w, "x1,x2,x3,scal")?;
    for p in points {
        writeln!(w, "{},{},{},{}", sig12(p.x1), sig12(p.x2), sig12(p.x3), sig12(p.scal))?;
    }
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    fn ex21() -> AlignedSpace {
        AlignedSpace::semisimple("ex21", 11, 7, 3, rat(1, 56), rat(1, 15)).unwrap()
    }

    fn ex29() -> AlignedSpace {
        AlignedSpace::semisimple("ex29", 14, 5, 10, rat(3, 10), rat(3, 4)).unwrap()
    }

    #[test]
    fn structural_constants_of_small_example() {
        let t = structural_constants(&ex21());
        assert_eq!(t.t111, rat(143, 28));
        assert_eq!(t.t223, rat(784, 355));
        let t = structural_constants(&ex29());
        assert_eq!((t.t111.clone(), t.t222.clone()), (int(0), int(0)));
        let eq = AlignedSpace::semisimple("eq", 5, 5, 3, rat(1, 5), rat(1, 5)).unwrap();
        assert_eq!(structural_constants(&eq).t333, int(0));
    }

    #[test]
    fn ricci_at_standard_metric() {
        let [r1, r2, r3] = ricci_eigenvalues(&ex29(), &DiagonalMetric::standard());
        // 1/2 - (2/5)(1/2)/(2 * 7/5)
        assert_eq!(r1, rat(3, 7));
        assert_eq!(r2, rat(9, 28));
        // 21/80 + 1/20 + 5/112
        assert_eq!(r3, rat(5, 14));
        let scal = scalar_curvature(&ex29(), &DiagonalMetric::standard());
        assert_eq!(scal, int(14) * rat(3, 7) + int(5) * rat(9, 28) + int(10) * r3);
    }

    #[test]
    fn three_routes_agree() {
        let g = [rat(3, 7), rat(5, 2), rat(11, 13)];
        for s in [ex21(), ex29()] {
            let a = ricci_closed_form(&s, &g);
            assert_eq!(a, ricci_casimir_form(&s, &g));
            assert_eq!(a, ricci_structural(&s, &g));
        }
    }

    #[test]
    fn torus_routes_agree_when_casimir_traces_match() {
        let s = AlignedSpace::abelian("t", 20, 24, 4, int(2), rat(1, 5), rat(1, 6)).unwrap();
        let g = [rat(3, 7), rat(5, 2), rat(11, 13)];
        assert_eq!(ricci_closed_form(&s, &g), ricci_structural(&s, &g));
        assert_eq!(ricci_closed_form(&s, &g), ricci_casimir_form(&s, &g));
    }

    #[test]
    fn homogeneity() {
        let g = DiagonalMetric::new(rat(2, 3), rat(5, 4), int(1)).unwrap();
        let t = rat(7, 3);
        let a = ricci_eigenvalues(&ex21(), &g);
        let b = ricci_eigenvalues(&ex21(), &g.scaled(&t));
        for i in 0..3 {
            assert_eq!(&a[i] / &t, b[i]);
        }
        assert_eq!(scalar_curvature(&ex21(), &g) / &t, scalar_curvature(&ex21(), &g.scaled(&t)));
        let (p, q) = einstein_residual(&ex21(), &g);
        let (p2, q2) = einstein_residual(&ex21(), &g.scaled(&t));
        assert_eq!((&p / &t, &q / &t), (p2, q2));
    }

    #[test]
    fn standard_metric_is_not_einstein_here() {
        let (a, b) = einstein_residual(&ex21(), &DiagonalMetric::standard());
        assert!(!a.is_zero() || !b.is_zero());
    }

    #[test]
    fn rejects_nonpositive_metric() {
        assert!(DiagonalMetric::new(int(1), int(0), int(1)).is_err());
    }

    #[test]
    fn grid_shapes() {
        let s = ex21();
        let g = landscape_grid(&s, (1.0, 1.0), (1.0, 1.0), 1).unwrap();
        assert_eq!(g.len(), 1);
        assert!((g[0].x3 - 1.0).abs() < 1e-15);
        let exact = crate::exact::to_f64(&scalar_curvature(&s, &DiagonalMetric::standard()));
        assert!((g[0].scal - exact).abs() < 1e-12);
        assert!(landscape_grid(&s, (0.5, 1.5), (0.5, 1.5), 1).is_err());
        assert!(landscape_grid(&s, (0.0, 1.5), (0.5, 1.5), 3).is_err());
        let g = landscape_grid(&s, (0.2, 3.0), (0.2, 3.0), 25).unwrap();
        assert_eq!(g.len(), 625);
        assert!(g.iter().all(|p| p.scal.is_finite()));
        assert_eq!((g[1].x1, g[25].x1), (0.2, g[0].x1 + (3.0 - 0.2) / 24.0));
    }

    #[test]
    fn csv_digits() {
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.123456789012345), "0.123456789012");
        assert_eq!(sig12(-12345.6789), "-12345.6789");
        assert_eq!(sig12(1.5e-9), "1.5e-9");
        let mut out = Vec::new();
        write_landscape_csv(&mut out, &[LandscapePoint { x1: 1.0, x2: 2.0, x3: 0.5, scal: 3.25 }], &["einstein 1 2 3".into()]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x1,x2,x3,scal\n1,2,0.5,3.25\n# einstein 1 2 3\n");
    }
}
