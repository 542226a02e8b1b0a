//! Subcommands and their argument parsing.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fraclim_core::covers::{guard_cells, verify_levels};
use fraclim_core::instance::declared_exponents;
use fraclim_core::limitfn::{
    a_exact, a_s_certified, a_s_exact, f_n, lambda_rho, lambda_s_certified, tail_identity_gate, CertifiedValue,
};
use fraclim_core::quasilinear::{estimate_alpha, estimate_beta};
use fraclim_core::{
    box_count_table, builtin, check_condition, fit_dimension, verify_quasilinear, BAdicPoint, BoxCountTable, CoverKind,
    CoverMeasure, Instance, SequenceEngine, TSeq, Verdict,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::json;

use crate::output::{read_csv, sha256_hex, write_csv, write_json, Provenance};

/// Outcome of a command that ran to completion.
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Parser)]
#[command(
    name = "fraclim",
    version,
    about = "Quasi-linear sequences, their limit functions and graph dimensions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Evaluate and validate recurrence specifications.
    #[command(subcommand)]
    Seq(SeqCmd),
    /// Evaluate remainders and limit functions.
    #[command(subcommand)]
    Limit(LimitCmd),
    /// Check nesting of rectangle covers.
    #[command(subcommand)]
    Covers(CoversCmd),
    /// Mass distribution scans.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Box counting and slope fits.
    #[command(subcommand)]
    Dim(DimCmd),
    /// Quasi-linearity constants and the separation condition.
    #[command(subcommand)]
    Ql(QlCmd),
    /// Run verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Export plot data.
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Args, Clone)]
pub struct SourceArgs {
    /// A `.seq` specification file.
    #[arg(long, conflicts_with = "builtin")]
    spec: Option<PathBuf>,
    /// A shipped sequence: rho, rudin_shapiro, thue_morse, tm_sum, tm_double_sum, rs_sum.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args, Clone)]
pub struct InstanceArgs {
    /// Named instance: rho, tm_sum, rs_sum, tm_double_sum, constant.
    #[arg(long, default_value = "rho")]
    instance: String,
    /// Use a `.seq` file instead of a named instance (needs --alpha).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Declared α for --spec.
    #[arg(long)]
    alpha: Option<String>,
    /// Declared β for --spec.
    #[arg(long, default_value = "0")]
    beta: String,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
pub enum SeqCmd {
    /// Values of the primary sequence over an index range.
    Eval {
        #[command(flatten)]
        src: SourceArgs,
        /// Inclusive index range `a..b`.
        #[arg(long, default_value = "0..16")]
        n: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a specification.
    Check {
        #[command(flatten)]
        src: SourceArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum What {
    /// The remainder `a` (or `a_s`).
    A,
    /// The limit function `λ` (or `λ_s`).
    Lambda,
}

#[derive(Subcommand)]
pub enum LimitCmd {
    /// Exact or certified value at a b-adic point.
    Eval {
        #[command(flatten)]
        inst: InstanceArgs,
        /// The point, as `p/b^n`, `p/q` with q a power of the base, or an integer.
        #[arg(long)]
        x: String,
        #[arg(long, value_enum, default_value = "a")]
        what: What,
        /// Radius target for certified values, e.g. `2^-30` or `1e-9`.
        #[arg(long, default_value = "2^-30")]
        eps: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "E", alias = "e")]
    E,
}

#[derive(Subcommand)]
pub enum CoversCmd {
    /// Check that every child rectangle lies in its parent, level by level.
    Verify {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Instance for E families (default tm_sum); F always uses rho.
        #[arg(long)]
        instance: Option<String>,
        /// Parent levels `a..b`; each is checked against the next level.
        #[arg(long, default_value = "1..8")]
        levels: String,
        /// Replace D_4 in the E half-height (to demonstrate a violation).
        #[arg(long)]
        d4: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum MeasureCmd {
    /// Sampled maximum of μ̃(S)/side^t over squares centred on the graph.
    Mdp {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 1.5)]
        t: f64,
        #[arg(long, default_value = "3..10")]
        levels: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Root cell `n0:k0`.
        #[arg(long, default_value = "2:5")]
        root: String,
        /// Exit with status 1 when the sampled maximum exceeds this bound.
        #[arg(long)]
        bound: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum DimCmd {
    /// Lower and upper box counts per level.
    Box {
        #[command(flatten)]
        inst: InstanceArgs,
        /// `u:v` with b-adic endpoints.
        #[arg(long, default_value = "1/4:1/2")]
        interval: String,
        #[arg(long, default_value = "4..10")]
        levels: String,
        #[arg(long, default_value_t = 3)]
        oversample: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares slope of a box-count table.
    Fit {
        table: PathBuf,
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum QlCmd {
    /// Minimal C for declared exponents.
    Verify {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long = "N", default_value_t = 100_000)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Suggested α and β from growth rates.
    Estimate {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long = "N", default_value_t = 1 << 16)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The separation condition along a sequence t_n.
    Condition {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        beta: Option<String>,
        /// Polynomial in n such as `2n` or `3*n+1`.
        #[arg(long, conflicts_with = "t_file")]
        t: Option<String>,
        /// File listing t_1, t_2, ... separated by commas or whitespace.
        #[arg(long)]
        t_file: Option<PathBuf>,
        #[arg(long = "K", default_value_t = 10)]
        k: u32,
        /// Required constant c; without it the largest certified c is reported.
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum VerifyCmd {
    /// Nesting, truncation, increment, tail and mass-distribution suites.
    All {
        #[arg(long, default_value = "1..8")]
        levels: String,
        /// Replace D_4 in the E-family nesting suite.
        #[arg(long)]
        d4: Option<String>,
        /// Square levels for the mass distribution suite.
        #[arg(long, default_value = "3..10")]
        mdp_levels: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
pub enum ExportCmd {
    /// `b^n` rows of (x, value, radius) on the level-n grid.
    Graph {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value = "a")]
        mode: What,
        #[arg(long, default_value = "2^-30")]
        eps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Rationals written as `p/q`, decimals, or powers `b^e` (e may be negative).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || anyhow!("cannot parse `{s}` as a rational number");
    if let Some((b, e)) = s.split_once('^') {
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        let e: i32 = e.trim().parse().map_err(|_| bad())?;
        let p = num_traits::pow(BigInt::from(b), e.unsigned_abs() as usize);
        let one = BigInt::from(1);
        return Ok(if e >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(one, p)
        });
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q == BigInt::from(0) {
            bail!("zero denominator in `{s}`");
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m = parse_rational(m)?;
        let e: i32 = e.parse().map_err(|_| bad())?;
        return Ok(m * parse_rational(&format!("10^{e}"))?);
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let all: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let v = BigRational::new(all, den);
    Ok(if neg { -v } else { v })
}

/// A point as `p/b^n`, or any non-negative rational whose denominator
/// divides a power of the base.
pub fn parse_point(s: &str, base: u32) -> Result<BAdicPoint> {
    if s.contains('^') {
        return Ok(BAdicPoint::parse_with_base(s, Some(base))?);
    }
    let r = parse_rational(s)?;
    if r < BigRational::from_integer(BigInt::from(0)) {
        bail!("point `{s}` is negative");
    }
    let mut den = BigInt::from(1);
    for n in 0..=256u32 {
        if (&den % r.denom()) == BigInt::from(0) {
            let num = (r.numer() * (&den / r.denom())).to_biguint().expect("non-negative");
            return Ok(BAdicPoint::new(base, num, n)?);
        }
        den *= base;
    }
    bail!("`{s}` is not a {base}-adic rational")
}

/// `a..b` (inclusive) or a single number.
pub fn parse_range(s: &str) -> Result<(u64, u64)> {
    let bad = || anyhow!("cannot parse range `{s}`; expected a..b");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse().map_err(|_| bad())?,
        ),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b {
        bail!("empty range `{s}`");
    }
    Ok((a, b))
}

fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let (a, b) = parse_range(s)?;
    let conv = |v: u64| u32::try_from(v).map_err(|_| anyhow!("level {v} is too large"));
    Ok((conv(a)?, conv(b)?))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// The engine and a label for reports: the builtin name or the file stem.
fn load_engine(src: &SourceArgs) -> Result<(String, Arc<SequenceEngine>)> {
    match (&src.spec, &src.builtin) {
        (Some(p), _) => {
            let text = read_text(p)?;
            let e = SequenceEngine::from_source(&text).with_context(|| format!("in {}", p.display()))?;
            let label = p
                .file_stem()
                .map_or_else(|| e.name().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((label, Arc::new(e)))
        }
        (None, Some(name)) => Ok((name.clone(), Arc::new(builtin(name)?))),
        (None, None) => bail!("give --spec FILE or --builtin NAME"),
    }
}

fn exponents(label: &str, alpha: &Option<String>, beta: &Option<String>) -> Result<(BigRational, BigRational)> {
    let declared = declared_exponents(label);
    let alpha = match (alpha, &declared) {
        (Some(a), _) => parse_rational(a)?,
        (None, Some((a, _))) => a.clone(),
        (None, None) => bail!("--alpha is required for `{label}`"),
    };
    let beta = match (beta, &declared) {
        (Some(b), _) => parse_rational(b)?,
        (None, Some((_, b))) => b.clone(),
        (None, None) => BigRational::from_integer(BigInt::from(0)),
    };
    Ok((alpha, beta))
}

fn load_instance(args: &InstanceArgs) -> Result<Instance> {
    match &args.spec {
        Some(p) => {
            let text = read_text(p)?;
            let engine = Arc::new(SequenceEngine::from_source(&text).with_context(|| format!("in {}", p.display()))?);
            let alpha = parse_rational(args.alpha.as_deref().ok_or_else(|| anyhow!("--spec needs --alpha"))?)?;
            let beta = parse_rational(&args.beta)?;
            let name = p
                .file_stem()
                .map_or_else(|| engine.name().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(Instance::from_engine(&name, engine, &alpha, &beta, None)?)
        }
        None => Ok(Instance::named(&args.instance)?),
    }
}

fn canonical(engine: &SequenceEngine) -> String {
    engine.spec().to_string()
}

pub fn run(cli: Cli) -> Result<Status> {
    match cli.cmd {
        Cmd::Seq(SeqCmd::Eval { src, n, format, out }) => seq_eval(&src, &n, format, out.as_deref()),
        Cmd::Seq(SeqCmd::Check { src }) => seq_check(&src),
        Cmd::Limit(LimitCmd::Eval { inst, x, what, eps }) => limit_eval(&inst, &x, what, &eps),
        Cmd::Covers(CoversCmd::Verify {
            kind,
            instance,
            levels,
            d4,
            out,
        }) => covers_verify(kind, instance, &levels, d4.as_deref(), out.as_deref()),
        Cmd::Measure(MeasureCmd::Mdp {
            inst,
            t,
            levels,
            samples,
            seed,
            root,
            bound,
            out,
        }) => measure_mdp(&inst, t, &levels, samples, seed, &root, bound, out.as_deref()),
        Cmd::Dim(DimCmd::Box {
            inst,
            interval,
            levels,
            oversample,
            out,
        }) => dim_box(&inst, &interval, &levels, oversample, out.as_deref()),
        Cmd::Dim(DimCmd::Fit { table, levels, out }) => dim_fit(&table, levels.as_deref(), out.as_deref()),
        Cmd::Ql(QlCmd::Verify {
            src,
            alpha,
            beta,
            n,
            out,
        }) => ql_verify(&src, &alpha, &beta, n, out.as_deref()),
        Cmd::Ql(QlCmd::Estimate { src, n, out }) => ql_estimate(&src, n, out.as_deref()),
        Cmd::Ql(QlCmd::Condition {
            src,
            alpha,
            beta,
            t,
            t_file,
            k,
            c,
            out,
        }) => ql_condition(
            &src,
            &alpha,
            &beta,
            t.as_deref(),
            t_file.as_deref(),
            k,
            c.as_deref(),
            out.as_deref(),
        ),
        Cmd::Verify(VerifyCmd::All {
            levels,
            d4,
            mdp_levels,
            samples,
            seed,
            out,
        }) => verify_all(&levels, d4.as_deref(), &mdp_levels, samples, seed, out.as_deref()),
        Cmd::Export(ExportCmd::Graph {
            inst,
            level,
            mode,
            eps,
            out,
        }) => export_graph(&inst, level, mode, &eps, out.as_deref()),
    }
}

fn seq_eval(src: &SourceArgs, n: &str, format: Format, out: Option<&Path>) -> Result<Status> {
    let (label, engine) = load_engine(src)?;
    let (a, b) = parse_range(n)?;
    let rows: Vec<(u64, i128)> = (a..=b)
        .map(|i| Ok((i, engine.eval(i as u128)?)))
        .collect::<Result<_>>()?;
    match format {
        Format::Json => {
            let values: Vec<_> = rows
                .iter()
                .map(|(n, v)| json!({"n": n, "value": v.to_string()}))
                .collect();
            write_json(out, &json!({"sequence": label, "values": values}))?;
        }
        Format::Csv => {
            let prov = Provenance::new("seq eval")
                .spec(&canonical(&engine))
                .param("sequence", &label)
                .param("range", format!("{a}..{b}"));
            let rows: Vec<Vec<String>> = rows.iter().map(|(n, v)| vec![n.to_string(), v.to_string()]).collect();
            write_csv(out, &prov, &["n", "value"], &rows)?;
        }
    }
    Ok(Status::Pass)
}

fn seq_check(src: &SourceArgs) -> Result<Status> {
    let (label, engine) = load_engine(src)?;
    let spec = engine.spec();
    let report = json!({
        "valid": true,
        "label": label,
        "primary": spec.name,
        "base": spec.base,
        "nmin": spec.nmin,
        "sequences": spec.seqs.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "spec_sha256": sha256_hex(&canonical(&engine)),
    });
    write_json(None, &report)?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct LimitReport {
    instance: String,
    what: What,
    x: String,
    mid: String,
    radius: String,
    mid_f64: f64,
    radius_f64: f64,
    exact: bool,
    n_used: Option<u32>,
}

fn limit_eval(args: &InstanceArgs, x: &str, what: What, eps: &str) -> Result<Status> {
    let inst = load_instance(args)?;
    let x = parse_point(x, inst.model.base())?;
    let eps = parse_rational(eps)?;
    let (value, n_used): (CertifiedValue, Option<u32>) = match (inst.name.as_str(), what) {
        ("constant", What::A) => (
            CertifiedValue::exact(BigRational::from_integer(BigInt::from(0))),
            Some(0),
        ),
        ("constant", What::Lambda) => bail!("the constant instance has no limit function"),
        ("rho", What::A) if x.to_rational() <= BigRational::from_integer(BigInt::from(1)) => {
            (CertifiedValue::exact(a_exact(&inst.engine, &x)?), Some(x.depth()))
        }
        ("rho", What::Lambda) if args.spec.is_none() => (lambda_rho(&inst.engine, &x, &eps)?, None),
        (_, What::A) => {
            let profile = inst.profile.as_ref().expect("profile instance");
            match a_s_exact(&inst.engine, profile, &x) {
                Ok(v) => (CertifiedValue::exact(v), Some(x.depth())),
                Err(fraclim_core::Error::ExactPathUnavailable(_)) => {
                    let (v, n) = a_s_certified(&inst.engine, profile, &x, &eps)?;
                    (v, Some(n))
                }
                Err(e) => return Err(e.into()),
            }
        }
        (_, What::Lambda) => {
            let profile = inst.profile.as_ref().expect("profile instance");
            (lambda_s_certified(&inst.engine, profile, &x, &eps)?, None)
        }
    };
    write_json(
        None,
        &LimitReport {
            instance: inst.name.clone(),
            what,
            x: x.to_string(),
            mid: value.mid().to_string(),
            radius: value.radius().to_string(),
            mid_f64: value.mid_f64(),
            radius_f64: value.radius_f64(),
            exact: value.is_exact(),
            n_used,
        },
    )?;
    Ok(Status::Pass)
}

fn covers_verify(
    kind: KindArg,
    instance: Option<String>,
    levels: &str,
    d4: Option<&str>,
    out: Option<&Path>,
) -> Result<Status> {
    let (lo, hi) = parse_levels(levels)?;
    let name = instance.unwrap_or_else(|| {
        if kind == KindArg::F {
            "rho".into()
        } else {
            "tm_sum".into()
        }
    });
    let mut inst = Instance::named(&name)?;
    let want = if kind == KindArg::F { CoverKind::F } else { CoverKind::E };
    if inst.model.kind() != want {
        bail!(
            "instance `{name}` has no {} family",
            if want == CoverKind::F { "F" } else { "E" }
        );
    }
    if let Some(d) = d4 {
        inst = inst.with_d4(parse_rational(d)?)?;
    }
    let reports = verify_levels(&inst.model, lo, hi + 1)?;
    let failed = reports.iter().find(|r| !r.pass);
    let pass = failed.is_none();
    let report = json!({
        "kind": want,
        "instance": name,
        "levels": [lo, hi],
        "d4": d4,
        "pass": pass,
        "violation": failed.map(|r| json!({
            "parent_level": r.parent_level,
            "k": r.violation.as_ref().map(|v| v.k.clone()),
            "i": r.violation.as_ref().map(|v| v.i),
            "parent": r.violation.as_ref().map(|v| &v.parent),
            "child": r.violation.as_ref().map(|v| &v.child),
        })),
    });
    write_json(out, &report)?;
    Ok(Status::from_pass(pass))
}

#[allow(clippy::too_many_arguments)]
fn measure_mdp(
    args: &InstanceArgs,
    t: f64,
    levels: &str,
    samples: u64,
    seed: u64,
    root: &str,
    bound: Option<f64>,
    out: Option<&Path>,
) -> Result<Status> {
    let inst = load_instance(args)?;
    let (lo, hi) = parse_levels(levels)?;
    let (n0, k0) = root
        .split_once(':')
        .and_then(|(a, b)| Some((a.trim().parse::<u32>().ok()?, b.trim().parse::<u128>().ok()?)))
        .ok_or_else(|| anyhow!("cannot parse root `{root}`; expected n0:k0"))?;
    let mu = CoverMeasure::new(inst.model.clone(), n0, k0)?;
    let report = mu.mdp_scan(t, lo, hi, samples, seed)?;
    let pass = bound.is_none_or(|b| report.max_ratio <= b);
    write_json(
        out,
        &json!({"instance": inst.name, "bound": bound, "pass": pass, "report": report}),
    )?;
    Ok(Status::from_pass(pass))
}

fn dim_box(args: &InstanceArgs, interval: &str, levels: &str, p: u32, out: Option<&Path>) -> Result<Status> {
    let inst = load_instance(args)?;
    let b = inst.model.base();
    let (u, v) = interval
        .split_once(':')
        .ok_or_else(|| anyhow!("cannot parse interval `{interval}`; expected u:v"))?;
    let (u, v) = (parse_point(u, b)?, parse_point(v, b)?);
    let (lo, hi) = parse_levels(levels)?;
    let table = box_count_table(&inst.model, &inst.name, &u, &v, lo, hi, p)?;
    let prov = Provenance::new("dim box")
        .spec(&canonical(&inst.engine))
        .param("instance", &inst.name)
        .param("base", b)
        .param("interval", format!("{u}:{v}"))
        .param("levels", format!("{lo}..{hi}"))
        .param("oversample", p);
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.delta.clone(),
                r.count_lower.to_string(),
                r.count_upper.to_string(),
            ]
        })
        .collect();
    write_csv(out, &prov, &["level", "delta", "count_lower", "count_upper"], &rows)?;
    Ok(Status::Pass)
}

/// The base `b` with `delta = 1/b^level`, from the first row with level >= 1.
fn infer_base(rows: &[(u32, BigRational)]) -> Result<u32> {
    let (level, delta) = rows
        .iter()
        .find(|(l, _)| *l >= 1)
        .ok_or_else(|| anyhow!("cannot infer the base from a table without positive levels"))?;
    let den = delta.recip().to_integer();
    let guess = den
        .to_string()
        .parse::<f64>()
        .map(|d| d.powf(1.0 / *level as f64).round() as u32)
        .unwrap_or(0);
    if guess < 2 || num_traits::pow(BigInt::from(guess), *level as usize) != den {
        bail!("delta {delta} at level {level} is not 1/b^level");
    }
    Ok(guess)
}

fn dim_fit(path: &Path, levels: Option<&str>, out: Option<&Path>) -> Result<Status> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| anyhow!("{} has no `{name}` column", path.display()))
    };
    let (cl, cd, clo, chi) = (col("level")?, col("delta")?, col("count_lower")?, col("count_upper")?);
    let bad = |r: usize| anyhow!("{}: malformed row {}", path.display(), r + 1);
    let mut parsed = Vec::new();
    let mut deltas = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let level: u32 = r.get(cl).and_then(|v| v.parse().ok()).ok_or_else(|| bad(i))?;
        let delta = parse_rational(r.get(cd).ok_or_else(|| bad(i))?)?;
        let count_lower: u128 = r.get(clo).and_then(|v| v.parse().ok()).ok_or_else(|| bad(i))?;
        let count_upper: u128 = r.get(chi).and_then(|v| v.parse().ok()).ok_or_else(|| bad(i))?;
        deltas.push((level, delta.clone()));
        parsed.push(fraclim_core::dimension::BoxRow {
            level,
            delta: delta.to_string(),
            count_lower,
            count_upper,
        });
    }
    let table = BoxCountTable {
        instance: path.display().to_string(),
        base: infer_base(&deltas)?,
        u: String::new(),
        v: String::new(),
        oversample: 0,
        rows: parsed,
    };
    let range = levels.map(parse_levels).transpose()?;
    let fit = fit_dimension(&table, range)?;
    write_json(out, &fit)?;
    Ok(Status::Pass)
}

fn ql_verify(
    src: &SourceArgs,
    alpha: &Option<String>,
    beta: &Option<String>,
    n: u64,
    out: Option<&Path>,
) -> Result<Status> {
    let (label, engine) = load_engine(src)?;
    let (a, b) = exponents(&label, alpha, beta)?;
    let (report, profile) = verify_quasilinear(&engine, &a, &b, n)?;
    let pass = !report.diverging;
    write_json(
        out,
        &json!({"sequence": label, "report": report, "profile": profile.summary(), "pass": pass}),
    )?;
    Ok(Status::from_pass(pass))
}

fn ql_estimate(src: &SourceArgs, n: u64, out: Option<&Path>) -> Result<Status> {
    let (label, engine) = load_engine(src)?;
    let alpha = estimate_alpha(&engine, n)?;
    let beta = estimate_beta(&engine, n)?;
    write_json(out, &json!({"sequence": label, "N": n, "alpha": alpha, "beta": beta}))?;
    Ok(Status::Pass)
}

#[allow(clippy::too_many_arguments)]
fn ql_condition(
    src: &SourceArgs,
    alpha: &Option<String>,
    beta: &Option<String>,
    t: Option<&str>,
    t_file: Option<&Path>,
    k: u32,
    c: Option<&str>,
    out: Option<&Path>,
) -> Result<Status> {
    let (label, engine) = load_engine(src)?;
    let (a, b) = exponents(&label, alpha, beta)?;
    let tseq: TSeq = match (t, t_file) {
        (Some(t), _) => t.parse()?,
        (None, Some(p)) => TSeq::from_list(&read_text(p)?)?,
        (None, None) => bail!("give --t EXPR or --t-file FILE"),
    };
    let (_, profile) = verify_quasilinear(&engine, &a, &b, fraclim_core::instance::PROFILE_RANGE)?;
    let c = c.map(parse_rational).transpose()?;
    let mut report = check_condition(engine, &profile, &tseq, k, c.as_ref())?;
    report.instance = label;
    let pass = report.verdict == Verdict::HoldsCertified;
    write_json(out, &report)?;
    Ok(Status::from_pass(pass))
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    pass: bool,
    detail: serde_json::Value,
}

fn verify_all(
    levels: &str,
    d4: Option<&str>,
    mdp_levels: &str,
    samples: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<Status> {
    let (lo, hi) = parse_levels(levels)?;
    if lo == 0 {
        bail!("levels start at 1");
    }
    let (mlo, mhi) = parse_levels(mdp_levels)?;
    let rho = Instance::named("rho")?;
    let mut tm = Instance::named("tm_sum")?;
    if let Some(d) = d4 {
        tm = tm.with_d4(parse_rational(d)?)?;
    }
    let mut suites = Vec::new();

    for (name, inst) in [("nesting_f", &rho), ("nesting_e_tm_sum", &tm)] {
        let reports = verify_levels(&inst.model, lo, hi + 1)?;
        let bad = reports.iter().find(|r| !r.pass);
        suites.push(Suite {
            name,
            pass: bad.is_none(),
            detail: json!({"levels": [lo, hi], "d4": if name == "nesting_f" { None } else { d4 }, "violation": bad.map(|r| json!({
                "parent_level": r.parent_level,
                "violation": r.violation,
            }))}),
        });
    }

    // |a(x) - f_n(x)| <= 2^(-n+1) on every level-(n+2) grid point.
    let mut trunc_bad = None;
    let mut trunc_checked = 0u64;
    'trunc: for n in lo..=hi.min(8) {
        let depth = n + 2;
        for z in 0..(1u64 << (2 * depth)) {
            let x = BAdicPoint::new(4, z, depth)?;
            let gap = a_exact(&rho.engine, &x)? - f_n(&rho.engine, &x, n)?;
            trunc_checked += 1;
            let bound = BigRational::new(BigInt::from(2), BigInt::from(1) << n);
            if num_traits::Signed::abs(&gap) > bound {
                trunc_bad = Some((n, x.to_string()));
                break 'trunc;
            }
        }
    }
    suites.push(Suite {
        name: "truncation",
        pass: trunc_bad.is_none(),
        detail: json!({"points": trunc_checked, "violation": trunc_bad}),
    });

    // a((z+1)4^-k) - a(z 4^-k) = Δρ(z) 2^-k, and 2^-k - 1 at z = 4^k - 1.
    let mut inc_bad = None;
    let mut unsigned_misses = 0u64;
    let mut inc_checked = 0u64;
    for k in lo..=hi.min(8) {
        let top = 1u64 << (2 * k);
        let step = BigRational::new(BigInt::from(1), BigInt::from(1) << k);
        let mut prev = a_exact(&rho.engine, &BAdicPoint::new(4, 1u32, k)?)?;
        for z in 1..top {
            let next = a_exact(&rho.engine, &BAdicPoint::new(4, z + 1, k)?)?;
            let inc = &next - &prev;
            let want = if z == top - 1 {
                &step - BigRational::from_integer(BigInt::from(1))
            } else {
                &step * BigRational::from_integer(BigInt::from(rho.engine.delta(z as u128)?))
            };
            inc_checked += 1;
            if inc != want && inc_bad.is_none() {
                inc_bad = Some((k, z));
            }
            if z < top - 1 && inc != step {
                unsigned_misses += 1;
            }
            prev = next;
        }
    }
    suites.push(Suite {
        name: "increment",
        pass: inc_bad.is_none(),
        detail: json!({
            "increments": inc_checked,
            "violation": inc_bad,
            "increments_equal_to_minus_2^-k": unsigned_misses,
        }),
    });

    let tail = tail_identity_gate(&rho.engine, 100_000);
    suites.push(Suite {
        name: "tail_identity",
        pass: tail.is_ok(),
        detail: json!({"n_max": 100_000, "error": tail.err().map(|e| e.to_string())}),
    });

    let mu = CoverMeasure::new(rho.model.clone(), 2, 5)?;
    let report = mu.mdp_scan(1.5, mlo, mhi, samples, seed)?;
    suites.push(Suite {
        name: "mass_distribution",
        pass: report.max_ratio <= 1024.0,
        detail: json!({"bound": 1024.0, "report": report}),
    });

    let pass = suites.iter().all(|s| s.pass);
    for s in &suites {
        eprintln!("{:<20} {}", s.name, if s.pass { "pass" } else { "FAIL" });
    }
    write_json(out, &json!({"pass": pass, "suites": suites}))?;
    Ok(Status::from_pass(pass))
}

fn fmt_f64(v: f64) -> String {
    if v != 0.0 && !(1e-4..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn export_graph(args: &InstanceArgs, level: u32, mode: What, eps: &str, out: Option<&Path>) -> Result<Status> {
    let inst = load_instance(args)?;
    let b = inst.model.base();
    let count = guard_cells(b, level)?;
    let eps = parse_rational(eps)?;
    let profile = inst.profile.clone();
    let rows: Vec<Vec<String>> = (0..count)
        .map(|k| -> Result<Vec<String>> {
            match mode {
                What::A => {
                    let x = BAdicPoint::new(b, k, level)?;
                    let v = if inst.model.has_exact_values() {
                        CertifiedValue::exact(inst.model.value_at_index(level, k)?.to_big())
                    } else {
                        a_s_certified(&inst.engine, profile.as_ref().expect("profile"), &x, &eps)?.0
                    };
                    Ok(vec![fmt_f64(x.to_f64()), fmt_f64(v.mid_f64()), fmt_f64(v.radius_f64())])
                }
                What::Lambda => {
                    let x = BAdicPoint::new(b, k + 1, level)?;
                    let v = match inst.name.as_str() {
                        "rho" if args.spec.is_none() => lambda_rho(&inst.engine, &x, &eps)?,
                        "constant" => bail!("the constant instance has no limit function"),
                        _ => lambda_s_certified(&inst.engine, profile.as_ref().expect("profile"), &x, &eps)?,
                    };
                    Ok(vec![fmt_f64(x.to_f64()), fmt_f64(v.mid_f64()), fmt_f64(v.radius_f64())])
                }
            }
        })
        .collect::<Result<_>>()?;
    let prov = Provenance::new("export graph")
        .spec(&canonical(&inst.engine))
        .param("instance", &inst.name)
        .param("level", level)
        .param("mode", if mode == What::A { "a" } else { "lambda" })
        .param("eps", &eps);
    write_csv(out, &prov, &["x", "value", "radius"], &rows)?;
    Ok(Status::Pass)
}
