//! Existence classification and certified solution of the Einstein equations
//! for diagonal metrics.

use crate::curvature::{einstein_residual_bounds, CertifiedMetric, DiagonalMetric};
use crate::exact::{
    isolate_real_roots, quartic_invariants, refine_root, resultant, sign, square_free_part, BiPoly, Eliminate,
    ExactError, Interval, QuarticInvariants, QuarticRootRule, Rational, RootInterval, Scalar, UniPoly,
};
use crate::spaces::AlignedSpace;
use num_traits::{One, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EinsteinError {
    #[error("{0} has abelian isotropy; this operation needs semisimple K")]
    AbelianInput(String),
    #[error("{0} has semisimple isotropy; this operation needs a torus")]
    SemisimpleInput(String),
    #[error("{name}: coefficient signs violated: {}", violations.join(", "))]
    SignPattern { name: String, violations: Vec<String> },
    #[error("{name}: admissible window for x2 is empty (lo = {lo}, hi = {hi})")]
    EmptyWindow { name: String, lo: String, hi: String },
    #[error("{name}: expected exactly one Einstein metric, found {count}")]
    AbelianCount { name: String, count: usize },
    #[error("{name}: could not certify root near {near}")]
    Uncertified { name: String, near: String },
    #[error("{name}: sign rule predicts {predicted} real roots, Sturm count is {counted}")]
    RuleMismatch { name: String, predicted: usize, counted: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Largest residual bound accepted for an emitted metric.
pub fn residual_tolerance() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(10).pow(12))
}

/// Default bracket width for solved metrics.
pub fn default_eps() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(10).pow(10))
}

/// The constants `A, ..., H` of the reduced two-equation system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemCoefficients {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub e: Rational,
    pub f: Rational,
    pub g: Rational,
    pub h: Rational,
}

/// The system constants and the quartic `a x^4 + b x^3 + c x^2 + d x + e` in `x2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuarticData {
    pub system: SystemCoefficients,
    /// Descending: `[a, b, c, d, e]`.
    pub coeffs: [Rational; 5],
}

impl QuarticData {
    fn compute(s: &AlignedSpace) -> Result<Self, EinsteinError> {
        if s.is_abelian() {
            return Err(EinsteinError::AbelianInput(s.name.clone()));
        }
        let k = s.constants();
        let ([a, b, c, d, e, f, g, h], coeffs) = system_and_quartic(&k.c1, &k.lambda, &k.k1, &k.k2);
        let sys = SystemCoefficients { a, b, c, d, e, f, g, h };
        Ok(QuarticData { system: sys, coeffs })
    }

    /// Named sign conditions that fail, from `A<0, B>0, ..., H<0` and `a>0, b<0, c>0, d<0, e>0`.
    pub fn sign_violations(&self) -> Vec<String> {
        let SystemCoefficients { a, b, c, d, e, f, g, h } = &self.system;
        let upper = [("A", a, -1), ("B", b, 1), ("C", c, 1), ("D", d, -1), ("E", e, -1), ("F", f, 1), ("G", g, -1), ("H", h, -1)];
        let lower = ["a", "b", "c", "d", "e"].into_iter().zip(self.coeffs.iter()).zip([1, -1, 1, -1, 1]);
        let mut out = Vec::new();
        for (name, v, want) in upper {
            if sign(v) != want {
                out.push(format!("{name}{}", if want > 0 { ">0" } else { "<0" }));
            }
        }
        for ((name, v), want) in lower {
            if sign(v) != want {
                out.push(format!("{name}{}", if want > 0 { ">0" } else { "<0" }));
            }
        }
        out
    }

    pub fn poly(&self) -> UniPoly {
        let mut c = self.coeffs.to_vec();
        c.reverse();
        UniPoly::new(c)
    }

    pub fn invariants(&self) -> QuarticInvariants {
        let [a, b, c, d, e] = &self.coeffs;
        quartic_invariants(a, b, c, d, e).expect("leading coefficient is D^2E^2 + B^2EH with E != 0")
    }

    /// `E x^2 + F x + G`, so that `x1^2 = -H x2^2 / q(x2)`.
    pub fn q_poly(&self) -> UniPoly {
        let s = &self.system;
        UniPoly::new(vec![s.g.clone(), s.f.clone(), s.e.clone()])
    }

    /// `x1` before squaring: `(H(A x2 + C) - D q(x2)) / (B q(x2))`.
    pub fn unsquared_x1(&self, x2: &Interval) -> Option<Interval> {
        let s = &self.system;
        let q = self.q_interval(x2);
        if q.contains_zero() {
            return None;
        }
        let num = Interval::point(s.h.clone()) * (Interval::point(s.a.clone()) * x2.clone() + Interval::point(s.c.clone()))
            - Interval::point(s.d.clone()) * q.clone();
        Some(num / (Interval::point(s.b.clone()) * q))
    }

    fn q_interval(&self, x2: &Interval) -> Interval {
        let s = &self.system;
        (Interval::point(s.e.clone()) * x2.clone() + Interval::point(s.f.clone())) * x2.clone()
            + Interval::point(s.g.clone())
    }
}

/// `([A, ..., H], [a, ..., e])` from `c1, lambda, kappa1, kappa2` over any field of scalars.
pub fn system_and_quartic<T: Scalar>(c1: &T, lambda: &T, k1: &T, k2: &T) -> ([T; 8], [T; 5]) {
    let n = T::from_int;
    let c1m = c1.clone() - n(1);
    let t1 = n(2) * k1.clone() + n(1);
    let t2 = n(2) * k2.clone() + n(1);
    let a = -(c1.clone() * t2.clone());
    let b = c1.clone() * t1;
    let c = n(2) * k2.clone();
    let d = -(n(2) * c1m.clone() * k1.clone());
    let e = -(c1.clone() * c1.clone() * c1.clone() * lambda.clone());
    let f = c1.clone() * c1m.clone() * t2.clone();
    let g = c1.clone() * lambda.clone() - c1m.clone() * t2;
    let h = -((n(1) - c1.clone() * lambda.clone()) * c1m.clone() * c1m);
    let ah_df = a.clone() * h.clone() - d.clone() * f.clone();
    let dg_ch = d.clone() * g.clone() - c.clone() * h.clone();
    let b2 = b.clone() * b.clone();
    let de = d.clone() * e.clone();
    let quartic = [
        de.clone() * de.clone() + b2.clone() * e.clone() * h.clone(),
        b2.clone() * f.clone() * h.clone() - n(2) * de.clone() * ah_df.clone(),
        ah_df.clone() * ah_df.clone() + n(2) * de * dg_ch.clone() + b2 * g.clone() * h.clone(),
        -(n(2) * ah_df * dg_ch.clone()),
        dg_ch.clone() * dg_ch,
    ];
    ([a, b, c, d, e, f, g, h], quartic)
}

/// Exact `A, ..., H` and `a, ..., e`; fails for torus quotients and on a sign-pattern violation.
pub fn assemble_quartic(s: &AlignedSpace) -> Result<QuarticData, EinsteinError> {
    let q = QuarticData::compute(s)?;
    let v = q.sign_violations();
    if !v.is_empty() {
        return Err(EinsteinError::SignPattern { name: s.name.clone(), violations: v });
    }
    Ok(q)
}

/// The coefficients without the sign-pattern check.
pub fn quartic_data_unchecked(s: &AlignedSpace) -> Result<QuarticData, EinsteinError> {
    QuarticData::compute(s)
}

/// `(1/c1, ((c1-1)(2 kappa2 + 1) - c1 lambda) / (c1^2 lambda))`.
pub fn bounds_e5(s: &AlignedSpace) -> Result<(Rational, Rational), EinsteinError> {
    let (lo, hi) = e5_window(s)?;
    if lo >= hi {
        return Err(EinsteinError::EmptyWindow { name: s.name.clone(), lo: lo.to_string(), hi: hi.to_string() });
    }
    Ok((lo, hi))
}

fn e5_window(s: &AlignedSpace) -> Result<(Rational, Rational), EinsteinError> {
    if s.is_abelian() {
        return Err(EinsteinError::AbelianInput(s.name.clone()));
    }
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let hi = ((&k.c1 - &one) * (&two * &k.k2 + &one) - &k.c1 * &k.lambda) / (&k.c1 * &k.c1 * &k.lambda);
    Ok((one / &k.c1, hi))
}

/// Which criterion produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictRule {
    Quartic(QuarticRootRule),
    AbelianUnique,
}

impl VerdictRule {
    pub fn label(self) -> &'static str {
        match self {
            VerdictRule::Quartic(r) => r.label(),
            VerdictRule::AbelianUnique => "abelian_unique",
        }
    }
}

impl fmt::Display for VerdictRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A solved Einstein metric, normalized by `x3 = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EinsteinMetric {
    pub metric: CertifiedMetric,
    /// Multiplicity of `x2` as a root of the eliminating polynomial.
    pub multiplicity: usize,
    /// Whether `x2` lies strictly inside the admissible window.
    pub within_window: bool,
    /// Certified bound on `max(|r1 - r2|, |r2 - r3|)` over the brackets.
    pub residual: Rational,
}

impl EinsteinMetric {
    pub fn midpoint(&self) -> DiagonalMetric {
        self.metric.midpoint()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscardReason {
    /// `q(x2) <= 0`, so `x1^2 = -H x2^2 / q(x2)` is not positive.
    QNonPositive,
    /// The unsquared expression for `x1` is not positive: a root created by squaring.
    UnsquaredX1NonPositive,
    /// `c1 x2 <= 1` for a torus, so `x1^2` is not positive.
    BelowSlope,
}

impl DiscardReason {
    pub fn label(self) -> &'static str {
        match self {
            DiscardReason::QNonPositive => "q(x2)<=0",
            DiscardReason::UnsquaredX1NonPositive => "unsquared_x1<=0",
            DiscardReason::BelowSlope => "c1*x2<=1",
        }
    }
}

/// A real root of the eliminating polynomial that gives no metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscardedRoot {
    pub x2: Interval,
    pub multiplicity: usize,
    pub reason: DiscardReason,
    /// The quantity whose sign failed, enclosed over the bracket.
    pub witness: Interval,
}

/// Cross-check data for a torus quotient through the cubic in `u = sqrt(c1 x2 - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicCheck {
    /// Discriminant of `u^3 - s u^2 + u - k`, rational because `s^2`, `sk`, `k^2` are.
    pub discriminant: Rational,
    /// Real roots of the cubic in floating point.
    pub real_roots: Vec<f64>,
    /// `sqrt(c1 x2 - 1)` at the certified metric.
    pub u_from_metric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EinsteinVerdict {
    pub space: String,
    pub exists: bool,
    /// Distinct real roots of the quartic from `classify`; number of metrics after solving.
    pub root_count: usize,
    pub invariants: Option<QuarticInvariants>,
    pub rule: VerdictRule,
    pub sign_violations: Vec<String>,
    pub metrics: Vec<EinsteinMetric>,
    pub discarded: Vec<DiscardedRoot>,
    pub cubic: Option<CubicCheck>,
    pub solved: bool,
}

impl EinsteinVerdict {
    pub fn invariant_signs(&self) -> Option<[i8; 4]> {
        self.invariants.as_ref().map(|i| i.signs())
    }
}

/// Verdict from the signs of the quartic invariants alone.
pub fn classify(s: &AlignedSpace) -> Result<EinsteinVerdict, EinsteinError> {
    let q = QuarticData::compute(s)?;
    let inv = q.invariants();
    let rule = inv.root_rule();
    let counted = isolate_real_roots(&q.poly())?.len();
    if let Some(predicted) = rule.distinct_real_roots() {
        if predicted != counted {
            return Err(EinsteinError::RuleMismatch { name: s.name.clone(), predicted, counted });
        }
    }
    Ok(EinsteinVerdict {
        space: s.name.clone(),
        exists: rule.has_real_root(),
        root_count: counted,
        invariants: Some(inv),
        rule: VerdictRule::Quartic(rule),
        sign_violations: q.sign_violations(),
        metrics: Vec::new(),
        discarded: Vec::new(),
        cubic: None,
        solved: false,
    })
}

/// Semisimple or torus solver as appropriate.
pub fn solve(s: &AlignedSpace, eps: &Rational) -> Result<EinsteinVerdict, EinsteinError> {
    if s.is_abelian() {
        solve_abelian(s, eps)
    } else {
        solve_semisimple(s, eps)
    }
}

enum Step<T> {
    Done(T),
    Refine,
}

/// Shrinks the bracket of a root of `sqf` (square-free) until `judge` decides.
fn certify<T>(
    name: &str,
    sqf: &UniPoly,
    root: &RootInterval,
    eps: &Rational,
    mut judge: impl FnMut(&Interval) -> Step<T>,
) -> Result<T, EinsteinError> {
    let simple = RootInterval { multiplicity: 1, ..root.clone() };
    let mut width = eps.clone();
    let sixteen = Rational::from_integer(16.into());
    for _ in 0..40 {
        let iv = refine_root(sqf, &simple, &width)?;
        if let Step::Done(t) = judge(&Interval::from_root(&iv)) {
            return Ok(t);
        }
        if iv.is_exact() {
            break;
        }
        width = width / &sixteen;
    }
    Err(EinsteinError::Uncertified { name: name.to_string(), near: crate::exact::decimal_string(&root.midpoint(), 12) })
}

fn residual_bound(s: &AlignedSpace, m: &CertifiedMetric) -> Rational {
    let (a, b) = einstein_residual_bounds(s, m);
    a.magnitude().max(b.magnitude())
}

enum Outcome {
    Metric(EinsteinMetric),
    Discard(DiscardedRoot),
}

/// Isolates the quartic's real roots and keeps those that give positive metrics.
pub fn solve_semisimple(s: &AlignedSpace, eps: &Rational) -> Result<EinsteinVerdict, EinsteinError> {
    let mut verdict = classify(s)?;
    let q = QuarticData::compute(s)?;
    let p = q.poly();
    let sqf = square_free_part(&p).to_rational();
    let (lo, hi) = e5_window(s)?;
    let tol = residual_tolerance();
    let one = Interval::point(Rational::one());
    let minus_h = -q.system.h.clone();
    let sqrt_eps = eps / Rational::from_integer(1024.into());
    let mut metrics = Vec::new();
    let mut discarded = Vec::new();
    for root in isolate_real_roots(&p)? {
        let mult = root.multiplicity;
        let outcome = certify(&s.name, &sqf, &root, eps, |x2| {
            let qv = q.q_interval(x2);
            match qv.sign() {
                None => return Step::Refine,
                Some(sg) if sg <= 0 => {
                    return Step::Done(Outcome::Discard(DiscardedRoot {
                        x2: x2.clone(),
                        multiplicity: mult,
                        reason: DiscardReason::QNonPositive,
                        witness: qv,
                    }))
                }
                _ => {}
            }
            let Some(x1u) = q.unsquared_x1(x2) else { return Step::Refine };
            match x1u.sign() {
                None => return Step::Refine,
                Some(sg) if sg <= 0 => {
                    return Step::Done(Outcome::Discard(DiscardedRoot {
                        x2: x2.clone(),
                        multiplicity: mult,
                        reason: DiscardReason::UnsquaredX1NonPositive,
                        witness: x1u,
                    }))
                }
                _ => {}
            }
            let x1sq = Interval::point(minus_h.clone()) * x2.square() / qv;
            let Ok(x1) = x1sq.sqrt(&sqrt_eps) else { return Step::Refine };
            if x1.hi() < x1u.lo() || x1u.hi() < x1.lo() {
                return Step::Refine;
            }
            let within = if lo >= hi {
                false
            } else if x2.lo() > &lo && x2.hi() < &hi {
                true
            } else if x2.hi() <= &lo || x2.lo() >= &hi {
                false
            } else {
                return Step::Refine;
            };
            let metric = CertifiedMetric { x1, x2: x2.clone(), x3: one.clone() };
            let residual = residual_bound(s, &metric);
            if residual > tol || metric.max_width() > *eps {
                return Step::Refine;
            }
            Step::Done(Outcome::Metric(EinsteinMetric { metric, multiplicity: mult, within_window: within, residual }))
        })?;
        match outcome {
            Outcome::Metric(m) => metrics.push(m),
            Outcome::Discard(d) => discarded.push(d),
        }
    }
    verdict.exists = !metrics.is_empty();
    verdict.root_count = metrics.len();
    verdict.metrics = metrics;
    verdict.discarded = discarded;
    verdict.solved = true;
    Ok(verdict)
}

/// The two torus equations, polynomial in `(x1, x2)` with `x3 = 1`:
/// `r1 = r3` and `r2 = r3` after clearing denominators. Outer variable `x1`.
pub fn abelian_system(s: &AlignedSpace) -> Result<(BiPoly, BiPoly), EinsteinError> {
    if !s.is_abelian() {
        return Err(EinsteinError::SemisimpleInput(s.name.clone()));
    }
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let c1m = &k.c1 - &one;
    let t1 = &two * &k.k1 + &one;
    let t2 = &two * &k.k2 + &one;
    let e1 = BiPoly::from_terms(&[(2, 0, one.clone()), (0, 2, &c1m * &t1), (1, 2, -(&k.c1 * &t1))]);
    let e2 = BiPoly::from_terms(&[(2, 0, t2.clone()), (0, 2, c1m), (2, 1, -(&k.c1 * &t2))]);
    Ok((e1, e2))
}

/// `x1` at a common root, from the first equation with `x1^2` taken from the second:
/// `((c1-1)/((2k2+1)(c1 x2 - 1)) + (c1-1)(2k1+1)) / (c1 (2k1+1))`.
fn abelian_x1(s: &AlignedSpace, x2: &Interval) -> Option<Interval> {
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let c1m = &k.c1 - &one;
    let t1 = &two * &k.k1 + &one;
    let t2 = &two * &k.k2 + &one;
    let slope = Interval::point(k.c1.clone()) * x2.clone() - Interval::point(one);
    if slope.contains_zero() {
        return None;
    }
    let inner = Interval::point(c1m.clone()) / (Interval::point(t2) * slope) + Interval::point(&c1m * &t1);
    Some(inner / Interval::point(&k.c1 * &t1))
}

/// Discriminant of the cubic `u^3 - s u^2 + u - k` with `s^2 = (c1-1)(2k2+1)` and
/// `k = sqrt((c1-1)/(2k2+1)) / (2k1+1)`.
pub fn abelian_cubic_discriminant(s: &AlignedSpace) -> Result<Rational, EinsteinError> {
    if !s.is_abelian() {
        return Err(EinsteinError::SemisimpleInput(s.name.clone()));
    }
    let k = s.constants();
    let one = Rational::one();
    let two = Rational::from_integer(2.into());
    let c1m = &k.c1 - &one;
    let t1 = &two * &k.k1 + &one;
    let t2 = &two * &k.k2 + &one;
    let s2 = &c1m * &t2;
    let sk = &c1m / &t1;
    let k2 = &c1m / (&t2 * &t1 * &t1);
    let n = |v: i64| Rational::from_integer(v.into());
    Ok(&s2 - n(4) - n(4) * &s2 * &sk - n(27) * k2 + n(18) * sk)
}

fn cubic_real_roots(s: &AlignedSpace) -> Vec<f64> {
    let k = s.constants();
    let c1m = crate::exact::to_f64(&k.c1) - 1.0;
    let t1 = 2.0 * crate::exact::to_f64(&k.k1) + 1.0;
    let t2 = 2.0 * crate::exact::to_f64(&k.k2) + 1.0;
    let sc = (c1m * t2).sqrt();
    let kc = (c1m / t2).sqrt() / t1;
    let f = |u: f64| ((u - sc) * u + 1.0) * u - kc;
    // derivative 3u^2 - 2 s u + 1; scan then bisect sign changes
    let hi = 1.0 + sc + 1.0 + kc;
    let n = 4000;
    let mut roots = Vec::new();
    let mut prev = (-hi, f(-hi));
    for i in 1..=n {
        let x = -hi + 2.0 * hi * i as f64 / n as f64;
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if prev.1 * fx < 0.0 {
            let (mut a, mut b) = (prev.0, x);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(a) * f(m) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (x, fx);
    }
    roots
}

/// The unique diagonal Einstein metric on a torus quotient, by resultant elimination of `x1`.
pub fn solve_abelian(s: &AlignedSpace, eps: &Rational) -> Result<EinsteinVerdict, EinsteinError> {
    let (e1, e2) = abelian_system(s)?;
    let mut res = resultant(&e1, &e2, Eliminate::Outer)?;
    while res.coeff(0).is_zero() && !res.is_zero() {
        res = res.div_exact(&UniPoly::x()).expect("x divides");
    }
    let sqf = square_free_part(&res).to_rational();
    let c1 = s.constants().c1;
    let tol = residual_tolerance();
    let one = Interval::point(Rational::one());
    let mut metrics = Vec::new();
    let mut discarded = Vec::new();
    for root in isolate_real_roots(&res)? {
        let mult = root.multiplicity;
        let outcome = certify(&s.name, &sqf, &root, eps, |x2| {
            let slope = Interval::point(c1.clone()) * x2.clone() - one.clone();
            match slope.sign() {
                None => return Step::Refine,
                Some(sg) if sg <= 0 => {
                    return Step::Done(Outcome::Discard(DiscardedRoot {
                        x2: x2.clone(),
                        multiplicity: mult,
                        reason: DiscardReason::BelowSlope,
                        witness: slope,
                    }))
                }
                _ => {}
            }
            let Some(x1) = abelian_x1(s, x2) else { return Step::Refine };
            match x1.sign() {
                None => return Step::Refine,
                Some(sg) if sg <= 0 => {
                    return Step::Done(Outcome::Discard(DiscardedRoot {
                        x2: x2.clone(),
                        multiplicity: mult,
                        reason: DiscardReason::UnsquaredX1NonPositive,
                        witness: x1,
                    }))
                }
                _ => {}
            }
            let metric = CertifiedMetric { x1, x2: x2.clone(), x3: one.clone() };
            let residual = residual_bound(s, &metric);
            if residual > tol || metric.max_width() > *eps {
                return Step::Refine;
            }
            Step::Done(Outcome::Metric(EinsteinMetric { metric, multiplicity: mult, within_window: true, residual }))
        })?;
        match outcome {
            Outcome::Metric(m) => metrics.push(m),
            Outcome::Discard(d) => discarded.push(d),
        }
    }
    if metrics.len() != 1 {
        return Err(EinsteinError::AbelianCount { name: s.name.clone(), count: metrics.len() });
    }
    let x2 = crate::exact::to_f64(&metrics[0].metric.x2.midpoint());
    let u_from_metric = (crate::exact::to_f64(&c1) * x2 - 1.0).sqrt();
    let cubic = CubicCheck { discriminant: abelian_cubic_discriminant(s)?, real_roots: cubic_real_roots(s), u_from_metric };
    Ok(EinsteinVerdict {
        space: s.name.clone(),
        exists: true,
        root_count: 1,
        invariants: None,
        rule: VerdictRule::AbelianUnique,
        sign_violations: Vec::new(),
        metrics,
        discarded,
        cubic: Some(cubic),
        solved: true,
    })
}
