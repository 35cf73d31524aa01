use super::expr::parse_expr;
use super::{compact_name, parse_group_name, AlignedSpace, GroupFamily, IrreducibleFactor, SpaceError};
use crate::exact::{parse_rational, sign_on_ray, Rational, RationalFn, UniPoly};
use num_traits::{One, Signed};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use thiserror::Error;

/// Environment variable naming a catalog file that replaces the bundled one.
pub const CATALOG_ENV: &str = "ALIGNED_EINSTEIN_CATALOG";

const BUNDLED: &str = include_str!("../../data/catalog.txt");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: field `{field}`: {msg}")]
    Field { line: usize, field: String, msg: String },
    #[error("{name}: {msg}")]
    Invalid { name: String, msg: String },
    #[error("catalog contains no records")]
    Empty,
    #[error("class C has {sporadic} sporadic spaces and {families} families, expected {want_sporadic} and {want_families}")]
    CountMismatch { sporadic: usize, families: usize, want_sporadic: usize, want_families: usize },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exists,
    NotExists,
}

impl Verdict {
    pub fn from_bool(exists: bool) -> Self {
        if exists {
            Self::Exists
        } else {
            Self::NotExists
        }
    }

    pub fn exists(self) -> bool {
        self == Self::Exists
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "exists" => Some(Self::Exists),
            "not_exists" => Some(Self::NotExists),
            _ => None,
        }
    }
}

/// Expected existence pattern of a family in its parameter `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum ExpectedFamilyVerdict {
    ExistsAll,
    NotExistsAll,
    ExistsIffMLe(i64),
    ExistsIffMGe(i64),
}

impl ExpectedFamilyVerdict {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "exists_all" => return Some(Self::ExistsAll),
            "not_exists_all" => return Some(Self::NotExistsAll),
            _ => {}
        }
        let (kind, k) = s.split_once(':')?;
        let k = k.parse().ok()?;
        match kind {
            "exists_iff_m_le" => Some(Self::ExistsIffMLe(k)),
            "exists_iff_m_ge" => Some(Self::ExistsIffMGe(k)),
            _ => None,
        }
    }

    pub fn exists_at(self, m: i64) -> bool {
        match self {
            Self::ExistsAll => true,
            Self::NotExistsAll => false,
            Self::ExistsIffMLe(k) => m <= k,
            Self::ExistsIffMGe(k) => m >= k,
        }
    }

    /// Whether the family counts as an existence family: it has Einstein
    /// metrics for all large `m`.
    pub fn is_existence_family(self) -> bool {
        matches!(self, Self::ExistsAll | Self::ExistsIffMGe(_))
    }

    pub fn describe(self, m_min: i64) -> String {
        match self {
            Self::ExistsAll => format!("exists for all m >= {m_min}"),
            Self::NotExistsAll => format!("exists for no m >= {m_min}"),
            Self::ExistsIffMLe(k) => format!("exists iff m <= {k}"),
            Self::ExistsIffMGe(k) => format!("exists iff m >= {k}"),
        }
    }
}

/// A simple `K` together with all factors `G/K` built on it.
#[derive(Clone, Debug)]
pub struct KGroup {
    pub name: String,
    pub d: i64,
    /// `(family, m)` when `K` is a member of a parametric row.
    pub instance_of: Option<(GroupFamily, i64)>,
    pub factors: Vec<IrreducibleFactor>,
}

/// One parametric row: a factor `G(m)/K(m)` for `K` in a classical family.
#[derive(Clone, Debug)]
pub struct ParamFactor {
    pub k_family: GroupFamily,
    pub key: String,
    pub m_min: i64,
    pub d: RationalFn,
    pub g_family: GroupFamily,
    pub g_template: String,
    pub g_arg: RationalFn,
    pub dim_g: RationalFn,
    pub n: RationalFn,
    pub a: RationalFn,
    pub adjoint: bool,
}

fn eval_int(f: &RationalFn, m: i64, what: &str, name: &str) -> Result<i64, CatalogError> {
    let v = f
        .eval(&Rational::from_integer(m.into()))
        .ok_or_else(|| CatalogError::Invalid { name: name.to_string(), msg: format!("{what} undefined at m = {m}") })?;
    if !v.is_integer() {
        return Err(CatalogError::Invalid { name: name.to_string(), msg: format!("{what} = {v} is not an integer at m = {m}") });
    }
    i64::try_from(v.to_integer())
        .map_err(|_| CatalogError::Invalid { name: name.to_string(), msg: format!("{what} overflows at m = {m}") })
}

fn k_name(fam: GroupFamily, m: i64) -> String {
    format!("{fam}({m})")
}

impl ParamFactor {
    pub fn g_name(&self, m: i64) -> Result<String, CatalogError> {
        let k = eval_int(&self.g_arg, m, "group argument", &self.key)?;
        Ok(format!("{}({k})", self.g_family))
    }

    pub fn instantiate(&self, m: i64) -> Result<IrreducibleFactor, CatalogError> {
        let name = self.g_name(m)?;
        let d = eval_int(&self.d, m, "d", &self.key)?;
        let a = self.a.eval(&Rational::from_integer(m.into())).ok_or_else(|| CatalogError::Invalid {
            name: self.key.clone(),
            msg: format!("a undefined at m = {m}"),
        })?;
        let f = IrreducibleFactor {
            name,
            group_family: self.g_family,
            group_dim: eval_int(&self.dim_g, m, "dimG", &self.key)?,
            n: eval_int(&self.n, m, "n", &self.key)?,
            a,
            isotropy_k: k_name(self.k_family, m),
            embedding_note: format!("row {} of the {} family", self.key, self.k_family),
            underlined: false,
            adjoint: self.adjoint,
            param_key: Some(self.key.clone()),
        };
        validate_factor(&f, d)?;
        Ok(f)
    }
}

/// Pair of parametric rows over the same `K` family, stored in canonical order.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub id: String,
    pub aliases: Vec<String>,
    pub k_family: GroupFamily,
    pub m_min: i64,
    pub g1: ParamFactor,
    pub g2: ParamFactor,
    /// True when the canonical order differs from the order of the record.
    pub swapped: bool,
    pub tables: Vec<String>,
    pub expected: ExpectedFamilyVerdict,
}

impl FamilySpec {
    pub fn n1(&self) -> &RationalFn {
        &self.g1.n
    }
    pub fn n2(&self) -> &RationalFn {
        &self.g2.n
    }
    pub fn d(&self) -> &RationalFn {
        &self.g1.d
    }
    pub fn a1(&self) -> &RationalFn {
        &self.g1.a
    }
    pub fn a2(&self) -> &RationalFn {
        &self.g2.a
    }

    pub fn label(&self) -> String {
        format!("{}x{}/{}(m)", self.g1.g_template, self.g2.g_template, self.k_family)
    }

    pub fn matches(&self, name: &str) -> bool {
        self.id == name || self.aliases.iter().any(|a| a == name)
    }

    pub fn instantiate(&self, m: i64) -> Result<CatalogSpace, CatalogError> {
        if m < self.m_min {
            return Err(CatalogError::Invalid { name: self.id.clone(), msg: format!("m = {m} is below m_min = {}", self.m_min) });
        }
        self.instantiate_unchecked(m)
    }

    fn instantiate_unchecked(&self, m: i64) -> Result<CatalogSpace, CatalogError> {
        let f1 = self.g1.instantiate(m)?;
        let f2 = self.g2.instantiate(m)?;
        let k = k_name(self.k_family, m);
        let d = eval_int(self.d(), m, "d", &self.id)?;
        let mut sp = pair_space(&k, d, &f1, &f2)?;
        sp.id = format!("{}@{m}", self.id);
        sp.source = SpaceSource::FamilyMember { family: self.id.clone(), m };
        Ok(sp)
    }
}

#[derive(Clone, Debug)]
pub struct Expectation {
    pub id: String,
    pub table: String,
    pub verdict: Verdict,
}

/// A family member that a table lists under its own name.
#[derive(Clone, Debug)]
pub struct ListedInstance {
    pub id: String,
    pub family: String,
    pub m: i64,
    pub label: String,
    pub table: String,
    pub expect: Verdict,
}

/// `G1 x G2 / T` with `T` a common maximal torus; Casimir constants are inputs.
#[derive(Clone, Debug)]
pub struct AbelianTemplate {
    pub id: String,
    pub g1: String,
    pub g2: String,
    pub d: RationalFn,
    pub n1: RationalFn,
    pub n2: RationalFn,
    pub m_min: Option<i64>,
}

impl AbelianTemplate {
    /// `(n1, n2, d)`; `m` is required exactly when the template is parametric.
    pub fn dims(&self, m: Option<i64>) -> Result<(i64, i64, i64), CatalogError> {
        let m = match (self.m_min, m) {
            (Some(lo), Some(m)) if m >= lo => m,
            (Some(lo), _) => {
                return Err(CatalogError::Invalid { name: self.id.clone(), msg: format!("needs m >= {lo}") })
            }
            (None, _) => 0,
        };
        Ok((
            eval_int(&self.n1, m, "n1", &self.id)?,
            eval_int(&self.n2, m, "n2", &self.id)?,
            eval_int(&self.d, m, "d", &self.id)?,
        ))
    }
}

#[derive(Clone, Debug)]
pub struct AbelianKappa {
    pub id: String,
    pub template: String,
    pub m: Option<i64>,
    pub k1: Rational,
    pub k2: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpaceSource {
    Sporadic,
    FamilyMember { family: String, m: i64 },
    Listed { family: String, m: i64 },
    Abelian { template: String },
    Explicit,
}

/// A space resolved from the catalog.
#[derive(Clone, Debug)]
pub struct CatalogSpace {
    pub id: String,
    pub label: String,
    pub k: String,
    pub space: AlignedSpace,
    pub source: SpaceSource,
    /// The factors in canonical order (absent for torus quotients).
    pub factors: Option<(IrreducibleFactor, IrreducibleFactor)>,
}

fn pair_space(k: &str, d: i64, f1: &IrreducibleFactor, f2: &IrreducibleFactor) -> Result<CatalogSpace, CatalogError> {
    let (f1, f2) = if (&f1.a, f1.n) <= (&f2.a, f2.n) { (f1, f2) } else { (f2, f1) };
    let id = format!("{}x{}_{}", compact_name(&f1.name), compact_name(&f2.name), compact_name(k));
    let label = format!("{}×{}/{}", f1.name, f2.name, k);
    let space = AlignedSpace::semisimple(id.clone(), f1.n, f2.n, d, f1.a.clone(), f2.a.clone())?;
    Ok(CatalogSpace {
        id,
        label,
        k: k.to_string(),
        space,
        source: SpaceSource::Sporadic,
        factors: Some((f1.clone(), f2.clone())),
    })
}

/// In-memory catalog.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub origin: String,
    pub groups: Vec<KGroup>,
    pub params: Vec<ParamFactor>,
    pub families: Vec<FamilySpec>,
    pub listed: Vec<ListedInstance>,
    pub expectations: Vec<Expectation>,
    pub abelian: Vec<AbelianTemplate>,
    pub abelian_kappa: Vec<AbelianKappa>,
    pub class_c_counts: Option<(usize, usize)>,
}

/// The class of spaces whose invariant metrics are all diagonal.
#[derive(Clone, Debug)]
pub struct ClassC {
    pub sporadic: Vec<CatalogSpace>,
    pub families: Vec<FamilySpec>,
}

pub fn load_catalog(path: &Path) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CatalogError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    Catalog::parse(&text, &path.display().to_string())
}

/// Checks a factor against the group-dimension formulas and the Killing-constant range.
fn validate_factor(f: &IrreducibleFactor, d: i64) -> Result<(), CatalogError> {
    let bad = |msg: String| Err(CatalogError::Invalid { name: format!("{}/{}", f.name, f.isotropy_k), msg });
    let Some((fam, k)) = parse_group_name(&f.name) else {
        return bad(format!("unrecognised group name {}", f.name));
    };
    if fam != f.group_family {
        return bad("group family disagrees with the name".into());
    }
    let formula = fam.dimension(k.unwrap_or(0));
    if formula != f.group_dim {
        return bad(format!("dimG = {} but the {fam} formula gives {formula}", f.group_dim));
    }
    if f.n < 1 {
        return bad(format!("n = {} must be at least 1", f.n));
    }
    if f.n + d != f.group_dim {
        return bad(format!("n + d = {} differs from dimG = {}", f.n + d, f.group_dim));
    }
    if !f.a.is_positive() || f.a >= Rational::one() {
        return bad(format!("a = {} is not in (0, 1)", f.a));
    }
    if f.adjoint && f.a != Rational::new(1.into(), (d - 2).into()) {
        return bad(format!("adjoint factor should have a = 1/(d-2), got {}", f.a));
    }
    Ok(())
}

struct Record<'a> {
    line: usize,
    kind: &'a str,
    fields: HashMap<&'a str, &'a str>,
    flags: HashSet<&'a str>,
}

impl<'a> Record<'a> {
    fn parse(line: usize, text: &'a str) -> Result<Option<Self>, CatalogError> {
        let text = text.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            return Ok(None);
        }
        let mut it = text.split_whitespace();
        let kind = it.next().unwrap();
        let mut fields = HashMap::new();
        let mut flags = HashSet::new();
        for tok in it {
            match tok.split_once('=') {
                Some((k, v)) => {
                    if fields.insert(k, v).is_some() {
                        return Err(CatalogError::Field { line, field: k.to_string(), msg: "repeated".into() });
                    }
                }
                None => {
                    flags.insert(tok);
                }
            }
        }
        Ok(Some(Record { line, kind, fields, flags }))
    }

    fn check_keys(&self, allowed: &[&str], allowed_flags: &[&str]) -> Result<(), CatalogError> {
        for k in self.fields.keys() {
            if !allowed.contains(k) {
                return Err(CatalogError::Field { line: self.line, field: k.to_string(), msg: "unknown field".into() });
            }
        }
        for f in &self.flags {
            if !allowed_flags.contains(f) {
                return Err(CatalogError::Parse { line: self.line, msg: format!("unknown flag `{f}`") });
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<&'a str, CatalogError> {
        self.fields
            .get(key)
            .copied()
            .ok_or_else(|| CatalogError::Field { line: self.line, field: key.to_string(), msg: "missing".into() })
    }

    fn field_err(&self, key: &str, msg: impl Into<String>) -> CatalogError {
        CatalogError::Field { line: self.line, field: key.to_string(), msg: msg.into() }
    }

    fn int(&self, key: &str) -> Result<i64, CatalogError> {
        let v = self.get(key)?;
        v.parse().map_err(|_| self.field_err(key, format!("expected an integer, got {v:?}")))
    }

    fn opt_int(&self, key: &str) -> Result<Option<i64>, CatalogError> {
        if self.fields.contains_key(key) {
            self.int(key).map(Some)
        } else {
            Ok(None)
        }
    }

    fn rational(&self, key: &str) -> Result<Rational, CatalogError> {
        let v = self.get(key)?;
        parse_rational(v).map_err(|e| self.field_err(key, e.to_string()))
    }

    fn expr(&self, key: &str) -> Result<RationalFn, CatalogError> {
        parse_expr(self.get(key)?).map_err(|e| self.field_err(key, e))
    }

    fn family(&self, key: &str) -> Result<GroupFamily, CatalogError> {
        let v = self.get(key)?;
        GroupFamily::parse(v)
            .filter(|f| f.is_classical())
            .ok_or_else(|| self.field_err(key, format!("expected SO, SU or Sp, got {v:?}")))
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.fields
            .get(key)
            .map(|v| v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect())
            .unwrap_or_default()
    }
}

/// Splits `SO((m-1)*(m+2)/2)` into the family and the argument expression.
fn parse_group_template(rec: &Record, key: &str) -> Result<(GroupFamily, String, RationalFn), CatalogError> {
    let v = rec.get(key)?;
    let open = v.find('(').ok_or_else(|| rec.field_err(key, "expected Family(expression)"))?;
    let fam = GroupFamily::parse(&v[..open])
        .filter(|f| f.is_classical())
        .ok_or_else(|| rec.field_err(key, "expected a classical family"))?;
    let inner = v[open + 1..].strip_suffix(')').ok_or_else(|| rec.field_err(key, "missing closing parenthesis"))?;
    let arg = parse_expr(inner).map_err(|e| rec.field_err(key, e))?;
    Ok((fam, v.to_string(), arg))
}

fn symbolic_dimension(fam: GroupFamily, k: &RationalFn) -> RationalFn {
    let c = |n: i64| RationalFn::constant(Rational::from_integer(n.into()));
    match fam {
        GroupFamily::SO => &(k * &(k - &c(1))) / &c(2),
        GroupFamily::SU => &(k * k) - &c(1),
        GroupFamily::Sp => k * &(&(k * &c(2)) + &c(1)),
        other => c(other.dimension(0)),
    }
}

/// Whether `f` is positive for every real `m >= from` (certified by Sturm sequences).
fn positive_on_ray(f: &RationalFn, from: i64) -> bool {
    let x = Rational::from_integer(from.into());
    matches!(
        (sign_on_ray(f.numer(), &x), sign_on_ray(f.denom(), &x)),
        (Some(a), Some(b)) if a == b
    )
}

/// Integer-valued on all integers iff integer on `deg + 1` consecutive ones.
fn integer_valued(f: &RationalFn, from: i64) -> bool {
    if !f.denom().is_constant() {
        return false;
    }
    let deg = f.numer().degree().unwrap_or(0) as i64;
    (from..=from + deg).all(|m| f.eval(&Rational::from_integer(m.into())).is_some_and(|v| v.is_integer()))
}

fn validate_param(p: &ParamFactor, line: usize) -> Result<(), CatalogError> {
    let bad = |msg: String| Err(CatalogError::Invalid { name: format!("{} (line {line})", p.key), msg });
    if &symbolic_dimension(p.g_family, &p.g_arg) != &p.dim_g {
        return bad("dimG disagrees with the group-dimension formula".into());
    }
    if &(&p.n + &p.d) != &p.dim_g {
        return bad("n + d differs from dimG".into());
    }
    let kd = symbolic_dimension(p.k_family, &RationalFn::from_poly(UniPoly::x()));
    if kd != p.d {
        return bad("d disagrees with the dimension of K".into());
    }
    for (what, f) in [("n", &p.n), ("d", &p.d), ("group argument", &p.g_arg)] {
        if !integer_valued(f, p.m_min) {
            return bad(format!("{what} is not integer valued"));
        }
    }
    if !positive_on_ray(&(&p.n - &RationalFn::constant(Rational::from_integer(1.into()))), p.m_min)
        && !p.n.eval(&Rational::from_integer(p.m_min.into())).is_some_and(|v| v >= Rational::one())
    {
        return bad("n must be at least 1".into());
    }
    let one = RationalFn::constant(Rational::one());
    if !positive_on_ray(&p.a, p.m_min) || !positive_on_ray(&(&one - &p.a), p.m_min) {
        return bad("a is not in (0, 1) for all m >= m_min".into());
    }
    if p.adjoint {
        let two = RationalFn::constant(Rational::from_integer(2.into()));
        if &(&one / &(&p.d - &two)) != &p.a {
            return bad("adjoint row should have a = 1/(d-2)".into());
        }
    }
    Ok(())
}

impl Catalog {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "bundled").expect("bundled catalog is valid")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED
    }

    /// `path`, else the file named by the environment variable, else the bundled catalog.
    pub fn resolve(path: Option<&Path>) -> Result<Self, CatalogError> {
        if let Some(p) = path {
            return load_catalog(p);
        }
        match std::env::var_os(CATALOG_ENV) {
            Some(p) if !p.is_empty() => load_catalog(Path::new(&p)),
            _ => Ok(Self::bundled()),
        }
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CatalogError> {
        let mut cat = Catalog {
            origin: origin.to_string(),
            groups: Vec::new(),
            params: Vec::new(),
            families: Vec::new(),
            listed: Vec::new(),
            expectations: Vec::new(),
            abelian: Vec::new(),
            abelian_kappa: Vec::new(),
            class_c_counts: None,
        };
        let mut group_index: BTreeMap<String, usize> = BTreeMap::new();
        let mut pending_families = Vec::new();
        let mut pending_factors = Vec::new();
        let mut pending_instances = Vec::new();
        let mut any = false;
        for (i, raw) in text.lines().enumerate() {
            let Some(rec) = Record::parse(i + 1, raw)? else { continue };
            any = true;
            match rec.kind {
                "group" => {
                    rec.check_keys(&["K", "d"], &[])?;
                    let name = rec.get("K")?.to_string();
                    let d = rec.int("d")?;
                    if group_index.contains_key(&name) {
                        return Err(CatalogError::Parse { line: rec.line, msg: format!("duplicate group {name}") });
                    }
                    let Some((fam, k)) = parse_group_name(&name) else {
                        return Err(rec.field_err("K", "unrecognised group name"));
                    };
                    if fam.dimension(k.unwrap_or(0)) != d {
                        return Err(rec.field_err("d", format!("dim {name} is {}", fam.dimension(k.unwrap_or(0)))));
                    }
                    group_index.insert(name.clone(), cat.groups.len());
                    cat.groups.push(KGroup { name, d, instance_of: None, factors: Vec::new() });
                }
                "instance" => {
                    rec.check_keys(&["K", "family", "m"], &[])?;
                    let name = rec.get("K")?.to_string();
                    let fam = rec.family("family")?;
                    let m = rec.int("m")?;
                    if parse_group_name(&name) != Some((fam, Some(m))) {
                        return Err(rec.field_err("K", format!("expected {}", k_name(fam, m))));
                    }
                    if group_index.contains_key(&name) {
                        return Err(CatalogError::Parse { line: rec.line, msg: format!("duplicate group {name}") });
                    }
                    group_index.insert(name.clone(), cat.groups.len());
                    cat.groups.push(KGroup { name, d: fam.dimension(m), instance_of: Some((fam, m)), factors: Vec::new() });
                    pending_instances.push((rec.line, cat.groups.len() - 1));
                }
                "factor" => {
                    rec.check_keys(&["K", "d", "G", "dimG", "n", "a", "note"], &["underlined", "adjoint"])?;
                    let g = rec.get("G")?;
                    let Some((fam, _)) = parse_group_name(g) else {
                        return Err(rec.field_err("G", "unrecognised group name"));
                    };
                    let f = IrreducibleFactor {
                        name: g.to_string(),
                        group_family: fam,
                        group_dim: rec.int("dimG")?,
                        n: rec.int("n")?,
                        a: rec.rational("a")?,
                        isotropy_k: rec.get("K")?.to_string(),
                        embedding_note: rec.fields.get("note").map(|s| s.replace('_', " ")).unwrap_or_default(),
                        underlined: rec.flags.contains("underlined"),
                        adjoint: rec.flags.contains("adjoint"),
                        param_key: None,
                    };
                    pending_factors.push((rec.line, rec.int("d")?, f));
                }
                "param_family" => {
                    rec.check_keys(&["K", "m_min", "key", "d", "G", "dimG", "n", "a"], &["adjoint"])?;
                    let (g_family, g_template, g_arg) = parse_group_template(&rec, "G")?;
                    let p = ParamFactor {
                        k_family: rec.family("K")?,
                        key: rec.get("key")?.to_string(),
                        m_min: rec.int("m_min")?,
                        d: rec.expr("d")?,
                        g_family,
                        g_template,
                        g_arg,
                        dim_g: rec.expr("dimG")?,
                        n: rec.expr("n")?,
                        a: rec.expr("a")?,
                        adjoint: rec.flags.contains("adjoint"),
                    };
                    if cat.params.iter().any(|q| q.k_family == p.k_family && q.key == p.key) {
                        return Err(rec.field_err("key", "duplicate key"));
                    }
                    validate_param(&p, rec.line)?;
                    cat.params.push(p);
                }
                "family" => {
                    rec.check_keys(&["id", "K", "g1", "g2", "m_min", "expect", "aliases", "tables"], &[])?;
                    let expected = ExpectedFamilyVerdict::parse(rec.get("expect")?)
                        .ok_or_else(|| rec.field_err("expect", "unknown verdict"))?;
                    pending_families.push((
                        rec.line,
                        rec.get("id")?.to_string(),
                        rec.family("K")?,
                        rec.get("g1")?.to_string(),
                        rec.get("g2")?.to_string(),
                        rec.int("m_min")?,
                        expected,
                        rec.list("aliases"),
                        rec.list("tables"),
                    ));
                }
                "listed" => {
                    rec.check_keys(&["id", "family", "m", "label", "table", "expect"], &[])?;
                    cat.listed.push(ListedInstance {
                        id: rec.get("id")?.to_string(),
                        family: rec.get("family")?.to_string(),
                        m: rec.int("m")?,
                        label: rec.get("label")?.replace('x', "×"),
                        table: rec.get("table")?.to_string(),
                        expect: Verdict::parse(rec.get("expect")?).ok_or_else(|| rec.field_err("expect", "unknown verdict"))?,
                    });
                }
                "expect" => {
                    rec.check_keys(&["id", "table", "verdict"], &[])?;
                    cat.expectations.push(Expectation {
                        id: rec.get("id")?.to_string(),
                        table: rec.get("table")?.to_string(),
                        verdict: Verdict::parse(rec.get("verdict")?).ok_or_else(|| rec.field_err("verdict", "unknown verdict"))?,
                    });
                }
                "abelian" => {
                    rec.check_keys(&["id", "G1", "G2", "d", "n1", "n2", "m_min"], &[])?;
                    let t = AbelianTemplate {
                        id: rec.get("id")?.to_string(),
                        g1: rec.get("G1")?.to_string(),
                        g2: rec.get("G2")?.to_string(),
                        d: rec.expr("d")?,
                        n1: rec.expr("n1")?,
                        n2: rec.expr("n2")?,
                        m_min: rec.opt_int("m_min")?,
                    };
                    let probe = t.m_min.unwrap_or(0);
                    for (what, f) in [("d", &t.d), ("n1", &t.n1), ("n2", &t.n2)] {
                        if !integer_valued(f, probe) {
                            return Err(rec.field_err(what, "not integer valued"));
                        }
                        if t.m_min.is_none() && !f.numer().is_constant() {
                            return Err(rec.field_err(what, "depends on m but no m_min is given"));
                        }
                        if !positive_on_ray(f, probe) && t.m_min.is_some() {
                            return Err(rec.field_err(what, "not positive for all m >= m_min"));
                        }
                    }
                    t.dims(t.m_min)?;
                    cat.abelian.push(t);
                }
                "abelian_kappa" => {
                    rec.check_keys(&["id", "template", "m", "k1", "k2"], &[])?;
                    let k = AbelianKappa {
                        id: rec.get("id")?.to_string(),
                        template: rec.get("template")?.to_string(),
                        m: rec.opt_int("m")?,
                        k1: rec.rational("k1")?,
                        k2: rec.rational("k2")?,
                    };
                    if !k.k1.is_positive() || !k.k2.is_positive() {
                        return Err(rec.field_err("k1", "Casimir constants must be positive"));
                    }
                    cat.abelian_kappa.push(k);
                }
                "class_c" => {
                    rec.check_keys(&["sporadic", "families"], &[])?;
                    cat.class_c_counts = Some((rec.int("sporadic")? as usize, rec.int("families")? as usize));
                }
                other => {
                    return Err(CatalogError::Parse { line: rec.line, msg: format!("unknown record type `{other}`") });
                }
            }
        }
        if !any {
            return Err(CatalogError::Empty);
        }
        for (line, gi) in pending_instances {
            let (fam, m) = cat.groups[gi].instance_of.unwrap();
            let rows: Vec<&ParamFactor> = cat.params.iter().filter(|p| p.k_family == fam).collect();
            if rows.is_empty() {
                return Err(CatalogError::Parse { line, msg: format!("no parametric rows for {fam}") });
            }
            let mut made = Vec::new();
            for p in rows {
                if m < p.m_min {
                    return Err(CatalogError::Parse { line, msg: format!("m = {m} below the range of row {}", p.key) });
                }
                made.push(p.instantiate(m)?);
            }
            cat.groups[gi].factors.extend(made);
        }
        for (line, d, f) in pending_factors {
            let Some(&gi) = group_index.get(&f.isotropy_k) else {
                return Err(CatalogError::Parse { line, msg: format!("factor over undeclared K = {}", f.isotropy_k) });
            };
            if cat.groups[gi].d != d {
                return Err(CatalogError::Field { line, field: "d".into(), msg: format!("dim {} is {}", f.isotropy_k, cat.groups[gi].d) });
            }
            validate_factor(&f, d)?;
            if cat.groups[gi].factors.iter().any(|g| g.name == f.name) {
                return Err(CatalogError::Parse { line, msg: format!("duplicate factor {}/{}", f.name, f.isotropy_k) });
            }
            cat.groups[gi].factors.push(f);
        }
        for (line, id, fam, k1, k2, m_min, expected, aliases, tables) in pending_families {
            let find = |key: &str| {
                cat.params
                    .iter()
                    .find(|p| p.k_family == fam && p.key == key)
                    .cloned()
                    .ok_or_else(|| CatalogError::Parse { line, msg: format!("no parametric row {key} for {fam}") })
            };
            let (p1, p2) = (find(&k1)?, find(&k2)?);
            if m_min < p1.m_min.max(p2.m_min) {
                return Err(CatalogError::Field { line, field: "m_min".into(), msg: "below the range of its rows".into() });
            }
            let diff = p2.a.clone() - p1.a.clone();
            let swapped = if positive_on_ray(&diff, m_min) {
                false
            } else if positive_on_ray(&-diff, m_min) {
                true
            } else {
                return Err(CatalogError::Invalid { name: id, msg: "the order of the Killing constants changes with m".into() });
            };
            let (g1, g2) = if swapped { (p2, p1) } else { (p1, p2) };
            cat.families.push(FamilySpec { id, aliases, k_family: fam, m_min, g1, g2, swapped, tables, expected });
        }
        for l in &cat.listed {
            let f = cat
                .family(&l.family)
                .ok_or_else(|| CatalogError::Invalid { name: l.id.clone(), msg: format!("unknown family {}", l.family) })?;
            let lo = f.g1.m_min.max(f.g2.m_min);
            if l.m < lo {
                return Err(CatalogError::Invalid { name: l.id.clone(), msg: format!("m = {} below {lo}", l.m) });
            }
        }
        for k in &cat.abelian_kappa {
            let t = cat.abelian.iter().find(|t| t.id == k.template).ok_or_else(|| CatalogError::Invalid {
                name: k.id.clone(),
                msg: format!("unknown abelian template {}", k.template),
            })?;
            t.dims(k.m)?;
        }
        Ok(cat)
    }

    pub fn group(&self, name: &str) -> Option<&KGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&FamilySpec> {
        self.families.iter().find(|f| f.matches(name))
    }

    pub fn expectation(&self, id: &str) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.id == id)
    }

    /// Every sporadic pair: two distinct factors over the same `K`, not both
    /// generated by parametric rows.
    pub fn sporadic_pairs(&self) -> Result<Vec<CatalogSpace>, CatalogError> {
        let mut out = Vec::new();
        for g in &self.groups {
            for i in 0..g.factors.len() {
                for j in i + 1..g.factors.len() {
                    let (f1, f2) = (&g.factors[i], &g.factors[j]);
                    if f1.param_key.is_some() && f2.param_key.is_some() {
                        continue;
                    }
                    out.push(pair_space(&g.name, g.d, f1, f2)?);
                }
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    /// Resolves a space identifier: a sporadic pair `G1xG2_K`, a listed member,
    /// a family member `FAMILY@m`, or a torus quotient with stored Casimir constants.
    pub fn space(&self, id: &str) -> Result<CatalogSpace, CatalogError> {
        if let Some((fam, m)) = id.split_once('@') {
            let f = self.family(fam).ok_or_else(|| CatalogError::UnknownFamily(fam.to_string()))?;
            let m = m.parse().map_err(|_| CatalogError::UnknownSpace(id.to_string()))?;
            return f.instantiate(m);
        }
        if let Some(l) = self.listed.iter().find(|l| l.id == id) {
            let f = self.family(&l.family).ok_or_else(|| CatalogError::UnknownFamily(l.family.clone()))?;
            let mut sp = f.instantiate_unchecked(l.m)?;
            sp.id = l.id.clone();
            sp.label = l.label.clone();
            sp.space.name = l.id.clone();
            sp.source = SpaceSource::Listed { family: f.id.clone(), m: l.m };
            return Ok(sp);
        }
        if let Some(k) = self.abelian_kappa.iter().find(|k| k.id == id) {
            return self.abelian_space(&k.template, k.m, 1, 1, k.k1.clone(), k.k2.clone(), Some(&k.id));
        }
        self.sporadic_pairs()?
            .into_iter()
            .find(|s| s.id == id)
            .ok_or_else(|| CatalogError::UnknownSpace(id.to_string()))
    }

    /// Instantiates an abelian template with slope `(p, q)` and given Casimir constants.
    #[allow(clippy::too_many_arguments)]
    pub fn abelian_space(
        &self,
        template: &str,
        m: Option<i64>,
        p: i64,
        q: i64,
        k1: Rational,
        k2: Rational,
        id: Option<&str>,
    ) -> Result<CatalogSpace, CatalogError> {
        let t = self
            .abelian
            .iter()
            .find(|t| t.id == template)
            .ok_or_else(|| CatalogError::UnknownSpace(template.to_string()))?;
        let (n1, n2, d) = t.dims(m)?;
        let base = match id {
            Some(id) => id.to_string(),
            None => match m {
                Some(m) if t.m_min.is_some() => format!("{}@{m}", t.id),
                _ => t.id.clone(),
            },
        };
        let space = super::abelian_space(&base, p, q, k1, k2, n1, n2, d)?;
        let sub = |s: &str| match m {
            Some(m) => s.replace("2*m", &(2 * m).to_string()).replace("m+1", &(m + 1).to_string()),
            None => s.to_string(),
        };
        let torus = format!("T{d}");
        Ok(CatalogSpace {
            id: space.name.clone(),
            label: format!("{}×{}/{torus}", sub(&t.g1), sub(&t.g2)),
            k: torus,
            space,
            source: SpaceSource::Abelian { template: t.id.clone() },
            factors: None,
        })
    }

    /// Semisimple members of the class whose Killing constants break `a2 < (2d+n2)/(2d+2n2)`,
    /// scanning sporadic pairs, listed members and family members up to `m_max`.
    pub fn admissibility_violations(&self, m_max: i64) -> Result<Vec<String>, CatalogError> {
        let mut out = Vec::new();
        for s in self.sporadic_pairs()? {
            if !s.space.admissibility_bound_holds() {
                out.push(s.id);
            }
        }
        for f in &self.families {
            for m in f.m_min..=m_max {
                let s = f.instantiate(m)?;
                if !s.space.admissibility_bound_holds() {
                    out.push(s.id);
                }
            }
        }
        Ok(out)
    }
}

/// Splits the pairs of the catalog into sporadic spaces and infinite families
/// and checks the totals against the counts declared in the catalog.
pub fn enumerate_class_c(cat: &Catalog) -> Result<ClassC, CatalogError> {
    let sporadic = cat.sporadic_pairs()?;
    let mut families = Vec::new();
    let mut fams: Vec<GroupFamily> = cat.params.iter().map(|p| p.k_family).collect();
    fams.sort();
    fams.dedup();
    for fam in fams {
        let rows: Vec<&ParamFactor> = cat.params.iter().filter(|p| p.k_family == fam).collect();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let (a, b) = (&rows[i].key, &rows[j].key);
                let f = cat
                    .families
                    .iter()
                    .find(|f| {
                        f.k_family == fam
                            && ((&f.g1.key == a && &f.g2.key == b) || (&f.g1.key == b && &f.g2.key == a))
                    })
                    .ok_or_else(|| CatalogError::Invalid {
                        name: format!("{a}+{b} over {fam}"),
                        msg: "pair of parametric rows has no family record".into(),
                    })?;
                families.push(f.clone());
            }
        }
    }
    let order: HashMap<&str, usize> = cat.families.iter().enumerate().map(|(i, f)| (f.id.as_str(), i)).collect();
    families.sort_by_key(|f| order[f.id.as_str()]);
    if let Some((want_sporadic, want_families)) = cat.class_c_counts {
        if sporadic.len() != want_sporadic || families.len() != want_families {
            return Err(CatalogError::CountMismatch {
                sporadic: sporadic.len(),
                families: families.len(),
                want_sporadic,
                want_families,
            });
        }
    }
    Ok(ClassC { sporadic, families })
}
