//! Aligned spaces `G1 x G2 / K`, their derived constants, and the catalog of
//! isotropy irreducible building blocks.

mod catalog;
mod expr;

pub use catalog::{
    enumerate_class_c, load_catalog, AbelianTemplate, Catalog, CatalogError, CatalogSpace, ClassC,
    Expectation, ExpectedFamilyVerdict, FamilySpec, KGroup, ListedInstance, ParamFactor, SpaceSource,
    Verdict, CATALOG_ENV,
};
pub use expr::parse_expr;

use crate::exact::{rat, Rational};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("{name}: {what} must be positive, got {value}")]
    NotPositive { name: String, what: &'static str, value: String },
    #[error("{name}: Killing constant {value} is not in (0, 1)")]
    KillingRange { name: String, value: String },
    #[error("{name}: c1 = {c1} violates 1 < c1")]
    C1Range { name: String, c1: String },
    #[error("{name}: Casimir constant {which} = {value} must be positive")]
    Casimir { name: String, which: &'static str, value: String },
    #[error("slopes p = {p}, q = {q} are not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("slopes must be at least 1, got p = {p}, q = {q}")]
    SlopeRange { p: i64, q: i64 },
}

/// Classical and exceptional simple compact groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupFamily {
    SO,
    SU,
    Sp,
    G2,
    F4,
    E6,
    E7,
    E8,
}

impl GroupFamily {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "SO" => Self::SO,
            "SU" => Self::SU,
            "Sp" => Self::Sp,
            "G2" => Self::G2,
            "F4" => Self::F4,
            "E6" => Self::E6,
            "E7" => Self::E7,
            "E8" => Self::E8,
            _ => return None,
        })
    }

    pub fn is_classical(self) -> bool {
        matches!(self, Self::SO | Self::SU | Self::Sp)
    }

    /// Dimension of the group; `k` is the rank-like argument for classical groups.
    pub fn dimension(self, k: i64) -> i64 {
        match self {
            Self::SO => k * (k - 1) / 2,
            Self::SU => k * k - 1,
            Self::Sp => k * (2 * k + 1),
            Self::G2 => 14,
            Self::F4 => 52,
            Self::E6 => 78,
            Self::E7 => 133,
            Self::E8 => 248,
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Splits `SO(8)` into `(SO, Some(8))` and `E6` into `(E6, None)`.
pub fn parse_group_name(name: &str) -> Option<(GroupFamily, Option<i64>)> {
    if let Some((fam, rest)) = name.split_once('(') {
        let k = rest.strip_suffix(')')?.parse().ok()?;
        let fam = GroupFamily::parse(fam)?;
        fam.is_classical().then_some((fam, Some(k)))
    } else {
        let fam = GroupFamily::parse(name)?;
        (!fam.is_classical()).then_some((fam, None))
    }
}

/// Group name with the parentheses dropped, as used in space identifiers.
pub fn compact_name(name: &str) -> String {
    name.chars().filter(|c| *c != '(' && *c != ')').collect()
}

/// One entry `G/K` of the building-block table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrreducibleFactor {
    pub name: String,
    pub group_family: GroupFamily,
    pub group_dim: i64,
    pub n: i64,
    #[serde(serialize_with = "crate::cli::ser_rational")]
    pub a: Rational,
    pub isotropy_k: String,
    pub embedding_note: String,
    pub underlined: bool,
    pub adjoint: bool,
    /// Key of the parametric row this factor was generated from, if any.
    pub param_key: Option<String>,
}

/// The two kinds of isotropy subgroup handled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// `K` semisimple with Killing constants `a1 <= a2`.
    Semisimple { a1: Rational, a2: Rational },
    /// `K` a torus; `c1` and the Casimir constants are given directly.
    Abelian { c1: Rational, k1: Rational, k2: Rational },
}

/// `M = G1 x G2 / K` with isotropy `p1 + p2 + p3`, `dim p1 = n1`, `dim p2 = n2`, `dim p3 = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedSpace {
    pub name: String,
    pub n1: i64,
    pub n2: i64,
    pub d: i64,
    pub kind: SpaceKind,
}

/// `c1, c2, lambda, kappa1, kappa2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedConstants {
    pub c1: Rational,
    /// `None` for abelian `K`, where only `c1` is meaningful.
    pub c2: Option<Rational>,
    pub lambda: Rational,
    pub k1: Rational,
    pub k2: Rational,
}

fn check_positive(name: &str, what: &'static str, v: i64) -> Result<(), SpaceError> {
    if v <= 0 {
        return Err(SpaceError::NotPositive { name: name.to_string(), what, value: v.to_string() });
    }
    Ok(())
}

impl AlignedSpace {
    /// Semisimple `K`; the two factors are swapped if needed so that `a1 <= a2`
    /// (ties broken by `n1 <= n2`).
    pub fn semisimple(
        name: impl Into<String>,
        n1: i64,
        n2: i64,
        d: i64,
        a1: Rational,
        a2: Rational,
    ) -> Result<Self, SpaceError> {
        let name = name.into();
        check_positive(&name, "n1", n1)?;
        check_positive(&name, "n2", n2)?;
        check_positive(&name, "d", d)?;
        for a in [&a1, &a2] {
            if !a.is_positive() || a >= &Rational::one() {
                return Err(SpaceError::KillingRange { name, value: a.to_string() });
            }
        }
        let (n1, n2, a1, a2) = if (&a1, n1) <= (&a2, n2) { (n1, n2, a1, a2) } else { (n2, n1, a2, a1) };
        let s = AlignedSpace { name, n1, n2, d, kind: SpaceKind::Semisimple { a1, a2 } };
        let k = s.constants();
        if !k.k1.is_positive() || !k.k2.is_positive() {
            return Err(SpaceError::Casimir { name: s.name, which: "kappa", value: format!("{}, {}", k.k1, k.k2) });
        }
        Ok(s)
    }

    /// Torus `K`: `c1 > 1` and positive Casimir constants.
    pub fn abelian(
        name: impl Into<String>,
        n1: i64,
        n2: i64,
        d: i64,
        c1: Rational,
        k1: Rational,
        k2: Rational,
    ) -> Result<Self, SpaceError> {
        let name = name.into();
        check_positive(&name, "n1", n1)?;
        check_positive(&name, "n2", n2)?;
        check_positive(&name, "d", d)?;
        if c1 <= Rational::one() {
            return Err(SpaceError::C1Range { name, c1: c1.to_string() });
        }
        if !k1.is_positive() {
            return Err(SpaceError::Casimir { name, which: "kappa1", value: k1.to_string() });
        }
        if !k2.is_positive() {
            return Err(SpaceError::Casimir { name, which: "kappa2", value: k2.to_string() });
        }
        Ok(AlignedSpace { name, n1, n2, d, kind: SpaceKind::Abelian { c1, k1, k2 } })
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.kind, SpaceKind::Abelian { .. })
    }

    pub fn dimension(&self) -> i64 {
        self.n1 + self.n2 + self.d
    }

    /// `(a1, a2)` for semisimple `K`.
    pub fn killing(&self) -> Option<(&Rational, &Rational)> {
        match &self.kind {
            SpaceKind::Semisimple { a1, a2 } => Some((a1, a2)),
            SpaceKind::Abelian { .. } => None,
        }
    }

    pub fn constants(&self) -> DerivedConstants {
        match &self.kind {
            SpaceKind::Semisimple { a1, a2 } => {
                let s = a1 + a2;
                let d = Rational::from_integer(self.d.into());
                DerivedConstants {
                    c1: &s / a2,
                    c2: Some(&s / a1),
                    lambda: a1 * a2 / &s,
                    k1: &d * (Rational::one() - a1) / Rational::from_integer(self.n1.into()),
                    k2: &d * (Rational::one() - a2) / Rational::from_integer(self.n2.into()),
                }
            }
            SpaceKind::Abelian { c1, k1, k2 } => DerivedConstants {
                c1: c1.clone(),
                c2: None,
                lambda: Rational::zero(),
                k1: k1.clone(),
                k2: k2.clone(),
            },
        }
    }

    /// `a2 < (2d + n2) / (2d + 2 n2)`; always true for a torus.
    pub fn admissibility_bound_holds(&self) -> bool {
        match &self.kind {
            SpaceKind::Semisimple { a2, .. } => {
                let (d, n2) = (self.d, self.n2);
                a2 < &rat(2 * d + n2, 2 * d + 2 * n2)
            }
            SpaceKind::Abelian { .. } => true,
        }
    }
}

pub fn derive_constants(s: &AlignedSpace) -> DerivedConstants {
    s.constants()
}

/// Torus quotient with slope `(p, q)`, so that `c1 = (p^2 + q^2) / p^2`.
#[allow(clippy::too_many_arguments)]
pub fn abelian_space(
    family_id: &str,
    p: i64,
    q: i64,
    k1: Rational,
    k2: Rational,
    n1: i64,
    n2: i64,
    d: i64,
) -> Result<AlignedSpace, SpaceError> {
    if p < 1 || q < 1 {
        return Err(SpaceError::SlopeRange { p, q });
    }
    if p.gcd(&q) != 1 {
        return Err(SpaceError::NotCoprime { p, q });
    }
    let c1 = rat(p * p + q * q, p * p);
    let name = if p == 1 && q == 1 { family_id.to_string() } else { format!("{family_id}[{p},{q}]") };
    AlignedSpace::abelian(name, n1, n2, d, c1, k1, k2)
}
