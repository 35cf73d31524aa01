//! Certification of existence verdicts for the infinite families, uniformly in `m`.

use crate::einstein::system_and_quartic;
use crate::exact::{invariant_forms, sign, IntPoly, QuarticRootRule, Rational, RationalFn, UniPoly};
use crate::spaces::{ExpectedFamilyVerdict, FamilySpec};
use num_traits::{One, Signed};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("{family}: probe bound {probe} must be at least m_min + 10 = {}", m_min + 10)]
    ProbeRange { family: String, m_min: i64, probe: i64 },
    #[error("{family}: denominator of {which} vanishes at m = {m}")]
    DenominatorVanishes { family: String, which: &'static str, m: i64 },
    #[error("{family}: the discriminant vanishes identically, so the sign rules do not decide")]
    Undecided { family: String },
    #[error("{factor} does not divide the numerator {times} times")]
    Factor { factor: String, times: usize },
}

/// `Delta(m), R(m), S(m), T(m)` and the quartic coefficients as rational functions of `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInvariants {
    pub coeffs: [RationalFn; 5],
    pub delta: RationalFn,
    pub r: RationalFn,
    pub s: RationalFn,
    pub t: RationalFn,
}

impl FamilyInvariants {
    pub fn named(&self) -> [(&'static str, &RationalFn); 4] {
        [("delta", &self.delta), ("R", &self.r), ("S", &self.s), ("T", &self.t)]
    }
}

fn lcm(a: &UniPoly, b: &UniPoly) -> UniPoly {
    (a * b).div_exact(&a.gcd(b)).expect("gcd divides").monic()
}

/// Pushes `n1, n2, d, a1, a2` through the coefficient pipeline with `m` symbolic.
/// The invariants are formed on the numerators over a common denominator `L`,
/// then divided by `L^6, L^4, L^2, L^3`.
pub fn family_invariants(f: &FamilySpec) -> FamilyInvariants {
    let one = RationalFn::constant(Rational::one());
    let (a1, a2) = (f.a1(), f.a2());
    let sum = a1 + a2;
    let c1 = &sum / a2;
    let lambda = &(a1 * a2) / &sum;
    let k1 = &(f.d() * &(&one - a1)) / f.n1();
    let k2 = &(f.d() * &(&one - a2)) / f.n2();
    let (_, coeffs) = system_and_quartic(&c1, &lambda, &k1, &k2);
    let den = coeffs.iter().fold(UniPoly::one(), |l, c| lcm(&l, c.denom()));
    let nums: Vec<UniPoly> = coeffs
        .iter()
        .map(|c| (c.numer() * &den).div_exact(c.denom()).expect("common denominator"))
        .collect();
    let [delta, r, s, t] = invariant_forms([&nums[0], &nums[1], &nums[2], &nums[3], &nums[4]], |k| {
        UniPoly::constant(Rational::from_integer(k.into()))
    });
    let base = crate::exact::square_free_part(&den).to_rational().monic();
    let over = |p: UniPoly, k: usize| RationalFn::new_with_base(p, den.pow(k), &base).expect("nonzero denominator");
    FamilyInvariants { delta: over(delta, 6), r: over(r, 4), s: over(s, 2), t: over(t, 3), coeffs }
}

/// Smallest integer `b` such that `p` has no real root in `[b, inf)`, or `None`
/// when `p` has no real roots at all.
pub fn root_free_from(p: &UniPoly) -> Option<i64> {
    if p.is_constant() {
        return None;
    }
    let ip = IntPoly::from_rational(p);
    let chain = ip.gcd(&ip.derivative()).to_rational();
    let sqf = IntPoly::from_rational(&p.div_exact(&chain).expect("gcd divides"));
    let chain = sqf.sturm_chain();
    if chain.count_all() == 0 {
        return None;
    }
    let above = |x: i64| {
        let x = Rational::from_integer(x.into());
        chain.count_above(&x) > 0 || sqf.sign_at(&x) == 0
    };
    let bound = sqf.root_bound().ceil().to_integer();
    let mut hi: i64 = i64::try_from(bound).unwrap_or(i64::MAX / 4) + 1;
    let mut lo: i64 = -hi;
    // `above(lo)` holds, `above(hi)` does not
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// Sign certificate for one invariant `N(m)/L(m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantCertificate {
    pub name: &'static str,
    pub numerator_degree: Option<usize>,
    pub denominator_degree: usize,
    /// From this integer on neither numerator nor denominator has a real root.
    pub constant_from: Option<i64>,
    /// The sign for all `m >= constant_from`.
    pub tail_sign: i8,
}

/// The set of admissible `m` with an Einstein metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExistenceSet {
    All,
    Empty,
    AtMost(i64),
    AtLeast(i64),
    /// Existence exactly at `members` below the tail start, and for all larger `m` iff `tail`.
    Irregular { members: Vec<i64>, tail_from: i64, tail: bool },
}

impl ExistenceSet {
    pub fn matches(&self, expected: ExpectedFamilyVerdict) -> bool {
        matches!(
            (self, expected),
            (ExistenceSet::All, ExpectedFamilyVerdict::ExistsAll)
                | (ExistenceSet::Empty, ExpectedFamilyVerdict::NotExistsAll)
        ) || matches!((self, expected),
                (ExistenceSet::AtMost(k), ExpectedFamilyVerdict::ExistsIffMLe(j)) |
                (ExistenceSet::AtLeast(k), ExpectedFamilyVerdict::ExistsIffMGe(j)) if *k == j)
    }

    pub fn contains(&self, m: i64) -> bool {
        match self {
            ExistenceSet::All => true,
            ExistenceSet::Empty => false,
            ExistenceSet::AtMost(k) => m <= *k,
            ExistenceSet::AtLeast(k) => m >= *k,
            ExistenceSet::Irregular { members, tail_from, tail } => {
                if m >= *tail_from {
                    *tail
                } else {
                    members.contains(&m)
                }
            }
        }
    }

    /// Whether Einstein metrics exist for all large `m`.
    pub fn is_existence_family(&self) -> bool {
        match self {
            ExistenceSet::All | ExistenceSet::AtLeast(_) => true,
            ExistenceSet::Empty | ExistenceSet::AtMost(_) => false,
            ExistenceSet::Irregular { tail, .. } => *tail,
        }
    }
}

impl fmt::Display for ExistenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExistenceSet::All => write!(f, "all m"),
            ExistenceSet::Empty => write!(f, "none"),
            ExistenceSet::AtMost(k) => write!(f, "m <= {k}"),
            ExistenceSet::AtLeast(k) => write!(f, "m >= {k}"),
            ExistenceSet::Irregular { members, tail_from, tail } => {
                let list: Vec<String> = members.iter().map(|m| m.to_string()).collect();
                write!(f, "m in {{{}}}", list.join(","))?;
                if *tail {
                    write!(f, " and m >= {tail_from}")?;
                }
                Ok(())
            }
        }
    }
}

/// Exact classification at one integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberVerdict {
    pub m: i64,
    pub signs: [i8; 4],
    pub rule: QuarticRootRule,
    pub exists: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyVerdict {
    pub family: String,
    pub label: String,
    pub m_min: i64,
    pub existence: ExistenceSet,
    pub expected: ExpectedFamilyVerdict,
    pub matches_expected: bool,
    pub certificates: Vec<InvariantCertificate>,
    /// Every integer from `m_min` up to the point where all signs are constant (and at least the probe bound).
    pub members: Vec<MemberVerdict>,
    /// The verdict shared by all `m >= tail_from`.
    pub tail_from: i64,
    pub tail_rule: QuarticRootRule,
}

fn rule_from_signs(signs: [i8; 4]) -> QuarticRootRule {
    let [dl, r, s, t] = signs;
    match dl {
        -1 => QuarticRootRule::DeltaNegative,
        1 if r < 0 && s < 0 => QuarticRootRule::DeltaPositiveRNegSNeg,
        1 => QuarticRootRule::DeltaPositiveOtherwise,
        _ if s > 0 && t == 0 && r == 0 => QuarticRootRule::DeltaZeroNoReal,
        _ => QuarticRootRule::DeltaZeroReal,
    }
}

fn certificate(name: &'static str, v: &RationalFn) -> InvariantCertificate {
    let bound = [root_free_from(v.numer()), root_free_from(v.denom())].into_iter().flatten().max();
    let lead = if v.is_zero() { 0 } else { sign(&v.numer().leading()) };
    InvariantCertificate {
        name,
        numerator_degree: v.numer().degree(),
        denominator_degree: v.denom().degree().unwrap_or(0),
        constant_from: bound,
        tail_sign: lead,
    }
}

/// Per-`m` verdicts on the exceptional range plus a Sturm certificate of constant signs beyond it.
pub fn certify_family(f: &FamilySpec, m_probe_max: i64) -> Result<FamilyVerdict, FamilyError> {
    if m_probe_max < f.m_min + 10 {
        return Err(FamilyError::ProbeRange { family: f.id.clone(), m_min: f.m_min, probe: m_probe_max });
    }
    let inv = family_invariants(f);
    if inv.delta.is_zero() {
        return Err(FamilyError::Undecided { family: f.id.clone() });
    }
    let certificates: Vec<InvariantCertificate> = inv.named().iter().map(|(n, v)| certificate(n, v)).collect();
    let tail_from = certificates.iter().filter_map(|c| c.constant_from).max().unwrap_or(f.m_min).max(f.m_min);
    let tail_signs: [i8; 4] = std::array::from_fn(|i| certificates[i].tail_sign);
    let tail_rule = rule_from_signs(tail_signs);
    let last = tail_from.max(m_probe_max);
    let mut members = Vec::new();
    for m in f.m_min..=last {
        let x = Rational::from_integer(m.into());
        let mut signs = [0i8; 4];
        for (i, (name, v)) in inv.named().iter().enumerate() {
            let val = v.eval(&x).ok_or(FamilyError::DenominatorVanishes { family: f.id.clone(), which: name, m })?;
            signs[i] = sign(&val);
        }
        let rule = rule_from_signs(signs);
        if m >= tail_from && rule != tail_rule {
            unreachable!("signs are constant beyond the certified bound");
        }
        members.push(MemberVerdict { m, signs, rule, exists: rule.has_real_root() });
    }
    let existence = assemble(&members, tail_from, tail_rule.has_real_root());
    Ok(FamilyVerdict {
        family: f.id.clone(),
        label: f.label(),
        m_min: f.m_min,
        matches_expected: existence.matches(f.expected),
        existence,
        expected: f.expected,
        certificates,
        members,
        tail_from,
        tail_rule,
    })
}

fn assemble(members: &[MemberVerdict], tail_from: i64, tail: bool) -> ExistenceSet {
    let head: Vec<&MemberVerdict> = members.iter().filter(|v| v.m < tail_from).collect();
    let flips = head.windows(2).filter(|w| w[0].exists != w[1].exists).count()
        + usize::from(head.last().is_some_and(|v| v.exists != tail));
    let first = head.first().map_or(tail, |v| v.exists);
    match (flips, first, tail) {
        (0, _, true) => ExistenceSet::All,
        (0, _, false) => ExistenceSet::Empty,
        (1, true, false) => ExistenceSet::AtMost(head.iter().rev().find(|v| v.exists).map(|v| v.m).unwrap()),
        (1, false, true) => ExistenceSet::AtLeast(
            members.iter().find(|v| v.exists).map(|v| v.m).unwrap_or(tail_from),
        ),
        _ => ExistenceSet::Irregular {
            members: head.iter().filter(|v| v.exists).map(|v| v.m).collect(),
            tail_from,
            tail,
        },
    }
}

/// Divides `p` by each `factor^times`, failing if a division is not exact.
pub fn strip_factors(p: &UniPoly, factors: &[(UniPoly, usize)]) -> Result<UniPoly, FamilyError> {
    let mut q = p.clone();
    for (f, times) in factors {
        for _ in 0..*times {
            q = q.div_exact(f).ok_or_else(|| FamilyError::Factor { factor: f.to_string(), times: *times })?;
        }
    }
    Ok(q)
}

/// Whether `p` is positive at every real `m >= from`, by a Sturm count and one evaluation.
pub fn positive_from(p: &UniPoly, from: &Rational) -> bool {
    crate::exact::sign_on_ray(p, from) == Some(1)
}

/// Leading coefficient sign is positive and the polynomial is nonzero.
pub fn leading_positive(p: &UniPoly) -> bool {
    !p.is_zero() && p.leading().is_positive()
}
