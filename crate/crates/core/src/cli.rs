//! Command-line surface: single-space reports, table sweeps, family certificates,
//! landscape export and catalog validation.
//!
//! Exit codes: 0 exists (or success), 3 does not exist, 2 usage or input error,
//! 1 internal failure, 4 a `--verify` comparison found a mismatch.

use crate::curvature::{landscape_grid, scalar_curvature_generic, sig12, write_landscape_csv, CurvatureError};
use crate::einstein::{bounds_e5, classify, default_eps, solve, EinsteinError, EinsteinVerdict};
use crate::exact::{decimal_string, fraction_string, parse_rational, to_f64, Interval, Rational};
use crate::families::{certify_family, ExistenceSet, FamilyError, FamilyVerdict};
use crate::spaces::{
    enumerate_class_c, AlignedSpace, Catalog, CatalogError, CatalogSpace, SpaceError, SpaceKind, SpaceSource,
};
use crate::stability::{instability_certificate, StabilityError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_EXISTS: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_EXISTS: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(r))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Einstein(#[from] EinsteinError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Space(_) | CliError::Curvature(_) => EXIT_USAGE,
            CliError::Catalog(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn positive_rational_arg(s: &str) -> Result<Rational, String> {
    let r = rational_arg(s)?;
    if r <= Rational::from_integer(0.into()) {
        return Err(format!("{s} is not positive"));
    }
    Ok(r)
}

#[derive(Debug, Parser)]
#[command(name = "aligned-einstein", version, about = "Invariant Einstein metrics on aligned homogeneous spaces")]
pub struct Cli {
    /// Catalog file overriding the bundled one and the environment variable.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Decimal places for displayed values.
    #[arg(long, global = true, default_value_t = 10)]
    pub digits: usize,
    /// Bracket width for solved metrics, as a fraction or decimal.
    #[arg(long, global = true, value_parser = positive_rational_arg)]
    pub eps: Option<Rational>,
    /// Add wall-clock timing to reports, making them run dependent.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Existence verdict with the metrics and their stability.
    Classify(SpaceArgs),
    /// As `classify`, adding discarded roots and the torus cubic check.
    Solve(SpaceArgs),
    /// Recompute the verdicts of a stored table.
    Table(TableArgs),
    /// Certify a whole family in its parameter.
    Family(FamilyArgs),
    /// Scalar curvature on the unit-volume slice as CSV.
    Landscape(LandscapeArgs),
    /// Load the catalog and report its class counts and admissibility.
    CatalogValidate(ValidateArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct SpaceArgs {
    /// Catalog identifier: `G1xG2_K`, `FAMILY@m`, a listed member or a stored torus quotient.
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub n2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub d: Option<i64>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    pub a1: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    pub a2: Option<Rational>,
    /// Torus isotropy: give `--c1 --k1 --k2` with the dimensions.
    #[arg(long)]
    pub abelian: bool,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    pub c1: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    pub k1: Option<Rational>,
    #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
    pub k2: Option<Rational>,
    /// Torus template from the catalog, used with `--k1 --k2` and optionally `--m --p --q`.
    #[arg(long)]
    pub template: Option<String>,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long, default_value_t = 1)]
    pub p: i64,
    #[arg(long, default_value_t = 1)]
    pub q: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    Flies,
    Sym,
    Spo,
    Spo2,
    All,
}

impl TableName {
    fn members(self) -> Vec<&'static str> {
        match self {
            TableName::Flies => vec!["flies"],
            TableName::Sym => vec!["sym"],
            TableName::Spo => vec!["spo"],
            TableName::Spo2 => vec!["spo2"],
            TableName::All => vec!["flies", "sym", "spo", "spo2"],
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct TableArgs {
    #[arg(long, value_enum)]
    pub table: TableName,
    /// Exit with code 4 when any row disagrees with the stored verdict.
    #[arg(long)]
    pub verify: bool,
    /// Largest `m` evaluated exactly for families.
    #[arg(long, default_value_t = 40)]
    pub m_probe_max: i64,
}

#[derive(Debug, Args, Clone)]
pub struct FamilyArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long, default_value_t = 40)]
    pub m_probe_max: i64,
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args, Clone)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub xmin: f64,
    #[arg(long)]
    pub xmax: f64,
    /// Range of `x2`; defaults to the `x1` range.
    #[arg(long)]
    pub ymin: Option<f64>,
    #[arg(long)]
    pub ymax: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ValidateArgs {
    /// Largest `m` scanned for the admissibility bound.
    #[arg(long, default_value_t = 40)]
    pub m_max: i64,
}

struct Ctx {
    catalog: Option<PathBuf>,
    json: bool,
    digits: usize,
    eps: Rational,
    timing: bool,
}

impl Ctx {
    fn catalog(&self) -> Result<Catalog, CliError> {
        Ok(Catalog::resolve(self.catalog.as_deref())?)
    }

    fn emit<T: Serialize>(&self, out: &mut dyn Write, value: &T, text: impl FnOnce() -> String) -> Result<(), CliError> {
        if self.json {
            serde_json::to_writer_pretty(&mut *out, value)?;
            writeln!(out)?;
        } else {
            write!(out, "{}", text())?;
        }
        Ok(())
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_EXISTS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let ctx = Ctx {
        catalog: cli.catalog,
        json: cli.json,
        digits: cli.digits,
        eps: cli.eps.unwrap_or_else(default_eps),
        timing: cli.timing,
    };
    match cli.command {
        Command::Classify(a) => cmd_space(&ctx, &a, false, out),
        Command::Solve(a) => cmd_space(&ctx, &a, true, out),
        Command::Table(a) => cmd_table(&ctx, &a, out),
        Command::Family(a) => cmd_family(&ctx, &a, out),
        Command::Landscape(a) => cmd_landscape(&ctx, &a, out),
        Command::CatalogValidate(a) => cmd_validate(&ctx, &a, out),
    }
}

// ------------------------------------------------------------------ space resolution

fn explicit_fields(a: &SpaceArgs) -> bool {
    a.n1.is_some() || a.n2.is_some() || a.d.is_some() || a.a1.is_some() || a.a2.is_some() || a.c1.is_some()
}

fn require<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| usage(format!("missing --{flag}")))
}

/// Resolves the space named by the arguments, from the catalog or from explicit constants.
pub fn resolve_space(a: &SpaceArgs, catalog: impl FnOnce() -> Result<Catalog, CliError>) -> Result<CatalogSpace, CliError> {
    if a.space.is_some() && (a.template.is_some() || explicit_fields(a) || a.abelian) {
        return Err(usage("--space cannot be combined with explicit constants or --template"));
    }
    if let Some(id) = &a.space {
        return Ok(catalog()?.space(id)?);
    }
    if let Some(t) = &a.template {
        let cat = catalog()?;
        return Ok(cat.abelian_space(t, a.m, a.p, a.q, require(&a.k1, "k1")?, require(&a.k2, "k2")?, None)?);
    }
    if !explicit_fields(a) {
        return Err(usage("give --space, --template, or explicit --n1 --n2 --d with --a1 --a2 (or --abelian --c1 --k1 --k2)"));
    }
    let (n1, n2, d) = (require(&a.n1, "n1")?, require(&a.n2, "n2")?, require(&a.d, "d")?);
    let space = if a.abelian {
        if a.a1.is_some() || a.a2.is_some() {
            return Err(usage("--a1/--a2 do not apply to a torus"));
        }
        AlignedSpace::abelian("explicit", n1, n2, d, require(&a.c1, "c1")?, require(&a.k1, "k1")?, require(&a.k2, "k2")?)?
    } else {
        if a.c1.is_some() || a.k1.is_some() || a.k2.is_some() {
            return Err(usage("--c1/--k1/--k2 need --abelian"));
        }
        AlignedSpace::semisimple("explicit", n1, n2, d, require(&a.a1, "a1")?, require(&a.a2, "a2")?)?
    };
    Ok(CatalogSpace {
        id: "explicit".into(),
        label: "explicit".into(),
        k: if a.abelian { format!("T{d}") } else { "K".into() },
        space,
        source: SpaceSource::Explicit,
        factors: None,
    })
}

// ------------------------------------------------------------------ single-space report

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceInfo {
    pub id: String,
    pub label: String,
    pub isotropy: String,
    pub kind: String,
    pub source: String,
}

/// Inputs echoed as exact fraction strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inputs {
    pub n1: i64,
    pub n2: i64,
    pub d: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k1: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k2: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: String,
    pub c2: Option<String>,
    pub lambda: String,
    pub kappa1: String,
    pub kappa2: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub delta: String,
    pub r: String,
    pub s: String,
    pub t: String,
    pub signs: [i8; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictInfo {
    pub exists: bool,
    pub rule: String,
    /// Distinct real roots of the quartic, or metrics for a torus.
    pub real_roots: usize,
    pub invariants: Option<Invariants>,
    pub sign_violations: Vec<String>,
    /// Open interval for `x2` at `x3 = 1`.
    pub window: Option<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilityInfo {
    pub verdict: String,
    pub rho: String,
    pub two_rho_minus_l22: Option<i8>,
    pub two_rho_minus_l33: Option<i8>,
    pub tangent_signs: Option<[i8; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricInfo {
    pub x1: String,
    pub x2: String,
    pub x3: String,
    /// Exact bracket endpoints `[lo, hi]` for each entry.
    pub brackets: [[String; 2]; 3],
    pub multiplicity: usize,
    pub within_window: bool,
    pub residual_bound: String,
    pub stability: StabilityInfo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardInfo {
    pub x2: [String; 2],
    pub multiplicity: usize,
    pub reason: String,
    pub witness: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicInfo {
    pub discriminant: String,
    pub real_roots: Vec<String>,
    pub u_from_metric: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub space: SpaceInfo,
    pub inputs: Inputs,
    pub constants: Constants,
    pub verdict: VerdictInfo,
    pub metrics: Vec<MetricInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub discarded: Option<Vec<DiscardInfo>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cubic: Option<CubicInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<f64>,
}

impl Report {
    /// Rebuilds the space from the echoed inputs.
    pub fn rebuild_space(&self) -> Result<AlignedSpace, CliError> {
        let get = |v: &Option<String>, name: &str| -> Result<Rational, CliError> {
            let s = v.as_deref().ok_or_else(|| usage(format!("report lacks {name}")))?;
            parse_rational(s).map_err(|e| usage(e.to_string()))
        };
        let i = &self.inputs;
        Ok(if self.space.kind == "abelian" {
            AlignedSpace::abelian(&self.space.id, i.n1, i.n2, i.d, get(&i.c1, "c1")?, get(&i.k1, "k1")?, get(&i.k2, "k2")?)?
        } else {
            AlignedSpace::semisimple(&self.space.id, i.n1, i.n2, i.d, get(&i.a1, "a1")?, get(&i.a2, "a2")?)?
        })
    }
}

/// Significant-digit rendering for quantities that may be tiny.
fn sci(r: &Rational, digits: usize) -> String {
    let x = to_f64(r);
    if x == 0.0 {
        return "0".into();
    }
    format!("{:.*e}", digits.max(1) - 1, x)
}

fn pair(iv: &Interval) -> [String; 2] {
    [fraction_string(iv.lo()), fraction_string(iv.hi())]
}

fn source_label(s: &SpaceSource) -> String {
    match s {
        SpaceSource::Sporadic => "sporadic".into(),
        SpaceSource::FamilyMember { family, m } => format!("family {family} m={m}"),
        SpaceSource::Listed { family, m } => format!("listed {family} m={m}"),
        SpaceSource::Abelian { template } => format!("torus template {template}"),
        SpaceSource::Explicit => "explicit".into(),
    }
}

/// Builds the report for one space: the invariant verdict plus the certified metrics.
pub fn build_report(cs: &CatalogSpace, eps: &Rational, digits: usize, detailed: bool) -> Result<Report, CliError> {
    let s = &cs.space;
    let k = s.constants();
    let inputs = match &s.kind {
        SpaceKind::Semisimple { a1, a2 } => Inputs {
            n1: s.n1,
            n2: s.n2,
            d: s.d,
            a1: Some(fraction_string(a1)),
            a2: Some(fraction_string(a2)),
            c1: None,
            k1: None,
            k2: None,
        },
        SpaceKind::Abelian { c1, k1, k2 } => Inputs {
            n1: s.n1,
            n2: s.n2,
            d: s.d,
            a1: None,
            a2: None,
            c1: Some(fraction_string(c1)),
            k1: Some(fraction_string(k1)),
            k2: Some(fraction_string(k2)),
        },
    };
    let constants = Constants {
        c1: fraction_string(&k.c1),
        c2: k.c2.as_ref().map(fraction_string),
        lambda: fraction_string(&k.lambda),
        kappa1: fraction_string(&k.k1),
        kappa2: fraction_string(&k.k2),
    };
    let solved = solve(s, eps)?;
    let verdict: EinsteinVerdict = if s.is_abelian() { solved.clone() } else { classify(s)? };
    let window = if s.is_abelian() {
        None
    } else {
        bounds_e5(s).ok().map(|(lo, hi)| [fraction_string(&lo), fraction_string(&hi)])
    };
    let invariants = verdict.invariants.as_ref().map(|i| Invariants {
        delta: sci(&i.delta, digits),
        r: sci(&i.r, digits),
        s: sci(&i.s, digits),
        t: sci(&i.t, digits),
        signs: i.signs(),
    });
    let mut metrics = Vec::new();
    for m in &solved.metrics {
        let st = instability_certificate(s, &m.metric)?;
        let mid = m.metric.midpoint();
        metrics.push(MetricInfo {
            x1: decimal_string(&mid.x1, digits),
            x2: decimal_string(&mid.x2, digits),
            x3: decimal_string(&mid.x3, digits),
            brackets: [pair(&m.metric.x1), pair(&m.metric.x2), pair(&m.metric.x3)],
            multiplicity: m.multiplicity,
            within_window: m.within_window,
            residual_bound: sci(&m.residual, 3),
            stability: StabilityInfo {
                verdict: st.verdict.label().into(),
                rho: decimal_string(&st.rho.midpoint(), digits),
                two_rho_minus_l22: st.witness_l22,
                two_rho_minus_l33: st.witness_l33,
                tangent_signs: st.tangent_signs,
            },
        });
    }
    let discarded = detailed.then(|| {
        solved
            .discarded
            .iter()
            .map(|r| DiscardInfo {
                x2: pair(&r.x2),
                multiplicity: r.multiplicity,
                reason: r.reason.label().into(),
                witness: pair(&r.witness),
            })
            .collect()
    });
    let cubic = if detailed {
        solved.cubic.as_ref().map(|c| CubicInfo {
            discriminant: fraction_string(&c.discriminant),
            real_roots: c.real_roots.iter().map(|u| format!("{u:.*}", digits)).collect(),
            u_from_metric: format!("{:.*}", digits, c.u_from_metric),
        })
    } else {
        None
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION.into(),
        command: if detailed { "solve" } else { "classify" }.into(),
        space: SpaceInfo {
            id: cs.id.clone(),
            label: cs.label.clone(),
            isotropy: cs.k.clone(),
            kind: if s.is_abelian() { "abelian" } else { "semisimple" }.into(),
            source: source_label(&cs.source),
        },
        inputs,
        constants,
        verdict: VerdictInfo {
            exists: verdict.exists,
            rule: verdict.rule.label().into(),
            real_roots: verdict.root_count,
            invariants,
            sign_violations: verdict.sign_violations.clone(),
            window,
        },
        metrics,
        discarded,
        cubic,
        timing_ms: None,
    })
}

fn report_text(r: &Report) -> String {
    let mut t = String::new();
    let mut line = |k: &str, v: String| t.push_str(&format!("{k:<11}{v}\n"));
    line("space", format!("{} ({}), {}", r.space.id, r.space.label, r.space.source));
    let i = &r.inputs;
    let mut inp = format!("n1={} n2={} d={}", i.n1, i.n2, i.d);
    for (k, v) in [("a1", &i.a1), ("a2", &i.a2), ("c1", &i.c1), ("k1", &i.k1), ("k2", &i.k2)] {
        if let Some(v) = v {
            inp.push_str(&format!(" {k}={v}"));
        }
    }
    line("inputs", inp);
    let c = &r.constants;
    let c2 = c.c2.as_ref().map(|c2| format!(" c2={c2}")).unwrap_or_default();
    line("constants", format!("c1={}{c2} lambda={} kappa1={} kappa2={}", c.c1, c.lambda, c.kappa1, c.kappa2));
    if let Some(inv) = &r.verdict.invariants {
        line("invariants", format!("delta={} R={} S={} T={}", inv.delta, inv.r, inv.s, inv.t));
    }
    if !r.verdict.sign_violations.is_empty() {
        line("warning", format!("coefficient signs violated: {}", r.verdict.sign_violations.join(", ")));
    }
    if let Some([lo, hi]) = &r.verdict.window {
        line("window", format!("{lo} < x2 < {hi}"));
    }
    line("rule", r.verdict.rule.clone());
    let word = if r.verdict.exists { "exists" } else { "not exists" };
    line("verdict", format!("{word} ({} real roots, {} metrics)", r.verdict.real_roots, r.metrics.len()));
    for (k, m) in r.metrics.iter().enumerate() {
        let win = if m.within_window { "" } else { " outside window" };
        line(
            &format!("metric {}", k + 1),
            format!(
                "x1={} x2={} x3={} residual<={} {}{win}",
                m.x1, m.x2, m.x3, m.residual_bound, m.stability.verdict
            ),
        );
    }
    if let Some(ds) = &r.discarded {
        for d in ds {
            line("discarded", format!("x2 in [{}, {}] ({})", d.x2[0], d.x2[1], d.reason));
        }
    }
    if let Some(c) = &r.cubic {
        line("cubic", format!("discriminant={} u={} roots=[{}]", c.discriminant, c.u_from_metric, c.real_roots.join(", ")));
    }
    if let Some(ms) = r.timing_ms {
        line("timing", format!("{ms:.3} ms"));
    }
    t
}

fn cmd_space(ctx: &Ctx, a: &SpaceArgs, detailed: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let cs = resolve_space(a, || ctx.catalog())?;
    let mut report = build_report(&cs, &ctx.eps, ctx.digits, detailed)?;
    if ctx.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    ctx.emit(out, &report, || report_text(&report))?;
    Ok(if report.verdict.exists { EXIT_EXISTS } else { EXIT_NOT_EXISTS })
}

// ------------------------------------------------------------------ tables

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub id: String,
    pub label: String,
    pub kind: String,
    pub expected: String,
    pub computed: String,
    /// Whether the computed verdict counts as existence (for all large `m` for families).
    pub exists: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableReport {
    pub name: String,
    pub rows: Vec<TableRow>,
    pub exists: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableSummary {
    pub sporadic_exists: usize,
    pub sporadic_total: usize,
    pub family_exists: usize,
    pub family_total: usize,
    pub mismatches: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TablesReport {
    pub schema_version: String,
    pub tables: Vec<TableReport>,
    pub summary: TableSummary,
}

enum RowJob<'a> {
    Sporadic { id: String, expected: bool },
    Listed { id: String, expected: bool },
    Family(&'a crate::spaces::FamilySpec),
}

fn verdict_word(exists: bool) -> String {
    if exists { "exists" } else { "not_exists" }.into()
}

fn run_row(cat: &Catalog, job: &RowJob, probe: i64) -> Result<TableRow, CliError> {
    match job {
        RowJob::Sporadic { id, expected } | RowJob::Listed { id, expected } => {
            let cs = cat.space(id)?;
            let v = classify(&cs.space)?;
            let kind = if matches!(job, RowJob::Sporadic { .. }) { "sporadic" } else { "listed" };
            Ok(TableRow {
                id: id.clone(),
                label: cs.label,
                kind: kind.into(),
                expected: verdict_word(*expected),
                computed: verdict_word(v.exists),
                exists: v.exists,
                ok: v.exists == *expected,
            })
        }
        RowJob::Family(f) => {
            let v = certify_family(f, probe.max(f.m_min + 10))?;
            Ok(TableRow {
                id: f.id.clone(),
                label: v.label.clone(),
                kind: "family".into(),
                expected: f.expected.describe(f.m_min),
                computed: v.existence.to_string(),
                exists: v.existence.is_existence_family(),
                ok: v.matches_expected,
            })
        }
    }
}

/// Recomputes every row of the named tables, in catalog order.
pub fn sweep_tables(cat: &Catalog, which: TableName, probe: i64) -> Result<TablesReport, CliError> {
    let mut tables = Vec::new();
    let mut summary =
        TableSummary { sporadic_exists: 0, sporadic_total: 0, family_exists: 0, family_total: 0, mismatches: Vec::new() };
    for name in which.members() {
        let mut jobs = Vec::new();
        for f in cat.families.iter().filter(|f| f.tables.iter().any(|t| t == name)) {
            jobs.push(RowJob::Family(f));
        }
        for l in cat.listed.iter().filter(|l| l.table == name) {
            jobs.push(RowJob::Listed { id: l.id.clone(), expected: l.expect.exists() });
        }
        for e in cat.expectations.iter().filter(|e| e.table == name) {
            jobs.push(RowJob::Sporadic { id: e.id.clone(), expected: e.verdict.exists() });
        }
        let rows = jobs.par_iter().map(|j| run_row(cat, j, probe)).collect::<Result<Vec<_>, _>>()?;
        for r in &rows {
            if !r.ok {
                summary.mismatches.push(format!("{name}:{}", r.id));
            }
            if r.kind == "sporadic" {
                summary.sporadic_total += 1;
                summary.sporadic_exists += r.exists as usize;
            }
            if r.kind == "family" && name == "flies" {
                summary.family_total += 1;
                summary.family_exists += r.exists as usize;
            }
        }
        let exists = rows.iter().filter(|r| r.exists).count();
        tables.push(TableReport { name: name.into(), total: rows.len(), exists, rows });
    }
    Ok(TablesReport { schema_version: SCHEMA_VERSION.into(), tables, summary })
}

fn tables_text(r: &TablesReport) -> String {
    let mut t = String::new();
    for tab in &r.tables {
        t.push_str(&format!("table {} ({} rows)\n", tab.name, tab.total));
        let w = tab.rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
        for row in &tab.rows {
            let mark = if row.ok { "ok" } else { "MISMATCH" };
            t.push_str(&format!(
                "  {:<w$}  {:<9} expected: {:<26} computed: {:<26} {mark}\n",
                row.id, row.kind, row.expected, row.computed
            ));
        }
        t.push_str(&format!("  {} exists / {} not\n", tab.exists, tab.total - tab.exists));
    }
    let s = &r.summary;
    if s.sporadic_total > 0 {
        t.push_str(&format!("sporadic existence total {}/{}\n", s.sporadic_exists, s.sporadic_total));
    }
    if s.family_total > 0 {
        t.push_str(&format!("family total {}/{}\n", s.family_exists, s.family_total));
    }
    if s.mismatches.is_empty() {
        t.push_str("mismatches: none\n");
    } else {
        t.push_str(&format!("mismatches: {}\n", s.mismatches.join(", ")));
    }
    t
}

fn cmd_table(ctx: &Ctx, a: &TableArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cat = ctx.catalog()?;
    let report = sweep_tables(&cat, a.table, a.m_probe_max)?;
    ctx.emit(out, &report, || tables_text(&report))?;
    Ok(if a.verify && !report.summary.mismatches.is_empty() { EXIT_MISMATCH } else { EXIT_EXISTS })
}

// ------------------------------------------------------------------ families

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateInfo {
    pub invariant: String,
    pub numerator_degree: Option<usize>,
    pub denominator_degree: usize,
    pub constant_from: Option<i64>,
    pub tail_sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MemberInfo {
    pub m: i64,
    pub signs: [i8; 4],
    pub rule: String,
    pub exists: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub schema_version: String,
    pub family: String,
    pub label: String,
    pub m_min: i64,
    pub existence: String,
    pub existence_family: bool,
    pub expected: String,
    pub matches_expected: bool,
    pub tail_from: i64,
    pub tail_rule: String,
    pub certificates: Vec<CertificateInfo>,
    pub members: Vec<MemberInfo>,
}

pub fn family_report(v: &FamilyVerdict) -> FamilyReport {
    FamilyReport {
        schema_version: SCHEMA_VERSION.into(),
        family: v.family.clone(),
        label: v.label.clone(),
        m_min: v.m_min,
        existence: v.existence.to_string(),
        existence_family: v.existence.is_existence_family(),
        expected: v.expected.describe(v.m_min),
        matches_expected: v.matches_expected,
        tail_from: v.tail_from,
        tail_rule: v.tail_rule.label().into(),
        certificates: v
            .certificates
            .iter()
            .map(|c| CertificateInfo {
                invariant: c.name.into(),
                numerator_degree: c.numerator_degree,
                denominator_degree: c.denominator_degree,
                constant_from: c.constant_from,
                tail_sign: c.tail_sign,
            })
            .collect(),
        members: v
            .members
            .iter()
            .map(|m| MemberInfo { m: m.m, signs: m.signs, rule: m.rule.label().into(), exists: m.exists })
            .collect(),
    }
}

fn family_text(r: &FamilyReport) -> String {
    let mut t = format!("family     {} ({}), m >= {}\n", r.family, r.label, r.m_min);
    t.push_str(&format!("existence  {}\n", r.existence));
    t.push_str(&format!("expected   {} ({})\n", r.expected, if r.matches_expected { "match" } else { "MISMATCH" }));
    t.push_str(&format!("tail       signs constant for m >= {}, rule {}\n", r.tail_from, r.tail_rule));
    for c in &r.certificates {
        let from = c.constant_from.map(|m| format!("no sign change past {m}")).unwrap_or_else(|| "no real roots".into());
        let deg = c.numerator_degree.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
        t.push_str(&format!(
            "  {:<5} degrees {}/{}  {}  sign {:+}\n",
            c.invariant, deg, c.denominator_degree, from, c.tail_sign
        ));
    }
    for m in &r.members {
        let [a, b, c, d] = m.signs;
        let word = if m.exists { "exists" } else { "none" };
        t.push_str(&format!("  m={:<4} signs ({a:+},{b:+},{c:+},{d:+})  {:<28} {word}\n", m.m, m.rule));
    }
    t
}

fn cmd_family(ctx: &Ctx, a: &FamilyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cat = ctx.catalog()?;
    let f = cat.family(&a.name).ok_or_else(|| CatalogError::UnknownFamily(a.name.clone()))?;
    let v = certify_family(f, a.m_probe_max).map_err(|e| match e {
        FamilyError::ProbeRange { .. } => usage(e.to_string()),
        e => CliError::Family(e),
    })?;
    let report = family_report(&v);
    ctx.emit(out, &report, || family_text(&report))?;
    Ok(if a.verify && !report.matches_expected {
        EXIT_MISMATCH
    } else if v.existence == ExistenceSet::Empty {
        EXIT_NOT_EXISTS
    } else {
        EXIT_EXISTS
    })
}

// ------------------------------------------------------------------ landscape

/// Comment lines locating the Einstein metrics on the unit-volume slice.
pub fn einstein_comments(s: &AlignedSpace, eps: &Rational) -> Result<Vec<String>, CliError> {
    let v = solve(s, eps)?;
    let mut out = Vec::new();
    for m in &v.metrics {
        let g = m.midpoint();
        let x = [to_f64(&g.x1), to_f64(&g.x2), to_f64(&g.x3)];
        let vol = (s.n1 as f64 * x[0].ln() + s.n2 as f64 * x[1].ln() + s.d as f64 * x[2].ln()) / s.dimension() as f64;
        let u = x.map(|xi| xi / vol.exp());
        let scal = scalar_curvature_generic(s, &u);
        out.push(format!("einstein x1={} x2={} x3={} scal={}", sig12(u[0]), sig12(u[1]), sig12(u[2]), sig12(scal)));
    }
    Ok(out)
}

fn cmd_landscape(ctx: &Ctx, a: &LandscapeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cs = resolve_space(&a.space, || ctx.catalog())?;
    let yr = (a.ymin.unwrap_or(a.xmin), a.ymax.unwrap_or(a.xmax));
    let points = landscape_grid(&cs.space, (a.xmin, a.xmax), yr, a.steps)?;
    let comments = einstein_comments(&cs.space, &ctx.eps)?;
    match &a.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_landscape_csv(&mut f, &points, &comments)?;
            f.flush()?;
            #[derive(Serialize)]
            struct Summary<'a> {
                schema_version: &'a str,
                space: &'a str,
                out: String,
                rows: usize,
                einstein_points: usize,
            }
            let sum = Summary {
                schema_version: SCHEMA_VERSION,
                space: &cs.id,
                out: path.display().to_string(),
                rows: points.len(),
                einstein_points: comments.len(),
            };
            ctx.emit(out, &sum, || {
                format!("wrote {} rows and {} Einstein points to {}\n", sum.rows, sum.einstein_points, sum.out)
            })?;
        }
        None => write_landscape_csv(out, &points, &comments)?,
    }
    Ok(EXIT_EXISTS)
}

// ------------------------------------------------------------------ catalog validation

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub schema_version: String,
    pub origin: String,
    pub sporadic: usize,
    pub families: usize,
    pub expectations: Vec<(String, usize)>,
    pub torus_templates: usize,
    /// Spaces breaking `a2 < (2d + n2) / (2d + 2 n2)`.
    pub admissibility_violations: Vec<String>,
}

fn cmd_validate(ctx: &Ctx, a: &ValidateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let cat = ctx.catalog()?;
    let class = enumerate_class_c(&cat)?;
    let mut tables: Vec<(String, usize)> = Vec::new();
    for e in &cat.expectations {
        match tables.iter_mut().find(|(t, _)| *t == e.table) {
            Some((_, n)) => *n += 1,
            None => tables.push((e.table.clone(), 1)),
        }
    }
    let report = ValidationReport {
        schema_version: SCHEMA_VERSION.into(),
        origin: cat.origin.clone(),
        sporadic: class.sporadic.len(),
        families: class.families.len(),
        expectations: tables,
        torus_templates: cat.abelian.len(),
        admissibility_violations: cat.admissibility_violations(a.m_max)?,
    };
    ctx.emit(out, &report, || {
        let mut t = format!("catalog    {}\n", report.origin);
        t.push_str(&format!("class      {} sporadic, {} families\n", report.sporadic, report.families));
        let tabs: Vec<String> = report.expectations.iter().map(|(t, n)| format!("{t}={n}")).collect();
        t.push_str(&format!("expected   {}\n", tabs.join(" ")));
        t.push_str(&format!("tori       {} templates\n", report.torus_templates));
        if report.admissibility_violations.is_empty() {
            t.push_str("bound      holds everywhere\n");
        } else {
            t.push_str(&format!(
                "bound      a2 bound fails for {}: {}\n",
                report.admissibility_violations.len(),
                compress_members(&report.admissibility_violations).join(", ")
            ));
        }
        t
    })?;
    Ok(EXIT_EXISTS)
}

/// Collapses consecutive family members `F@a, F@a+1, ..., F@b` into `F@a..b`.
fn compress_members(ids: &[String]) -> Vec<String> {
    let mut out: Vec<(String, Option<(i64, i64)>)> = Vec::new();
    for id in ids {
        let parsed = id.split_once('@').and_then(|(f, m)| Some((f.to_string(), m.parse::<i64>().ok()?)));
        if let (Some((f, m)), Some((last, Some((_, hi))))) = (&parsed, out.last_mut()) {
            if last == f && *hi + 1 == *m {
                *hi = *m;
                continue;
            }
        }
        out.push(match parsed {
            Some((f, m)) => (f, Some((m, m))),
            None => (id.clone(), None),
        });
    }
    out.into_iter()
        .map(|(f, r)| match r {
            Some((lo, hi)) if lo == hi => format!("{f}@{lo}"),
            Some((lo, hi)) => format!("{f}@{lo}..{hi}"),
            None => f,
        })
        .collect()
}
