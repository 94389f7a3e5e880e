//! Command implementations behind the `benford-tv` binary: the comparison
//! table, single bounds, exact values and the oracles, plus their renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    bound_convex_eighth, bound_fourier_closed, bound_fourier_uniform_log, bound_step_density, bound_tv_quarter,
    bound_tv_scaled, bound_uniform_log_tv, exact_delta_uniform, exact_uniform_params, BoundMethod, BoundReport,
};
use crate::density::{scale_density, Convexity, Monotonicity, PiecewiseDensity, Segment};
use crate::error::Error;
use crate::oracle::{delta_monte_carlo, delta_numeric, OracleResult, QuadratureConfig};

/// The values of `n` in the default table.
pub const DEFAULT_NS: [u64; 11] = [1, 2, 3, 4, 5, 8, 10, 20, 50, 100, 1000];
pub const DEFAULT_BASE: f64 = 10.0;
pub const DEFAULT_DIGITS: usize = 7;
/// Number of Fourier coefficients kept by `fourier_parseval` in the CLI.
pub const PARSEVAL_TERMS: u64 = 1000;

/// Failures of a CLI command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::Domain(_) | Error::InvalidDensity(_) | Error::MassMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u64,
    pub exact: f64,
    pub tv_bound: f64,
    pub fourier_bound: f64,
}

/// Exact distance, `ln b/(8n)` and `ln b/(2√12 n)` for each `n`.
pub fn table(b: f64, ns: &[u64]) -> CliResult<Vec<TableRow>> {
    if ns.is_empty() {
        return Err(CliError::Usage("the list of n values is empty".into()));
    }
    ns.iter()
        .map(|&n| {
            Ok(TableRow {
                n,
                exact: exact_delta_uniform(b, n as f64)?.value,
                tv_bound: bound_uniform_log_tv(b, n)?.value,
                fourier_bound: bound_fourier_closed(b, n)?.value,
            })
        })
        .collect()
}

/// Fixed-width text table, values rounded to `digits` decimals.
pub fn render_text(rows: &[TableRow], digits: usize) -> String {
    let n_width = rows.iter().map(|r| r.n.to_string().len()).max().unwrap_or(1).max(1);
    let width = (digits + 2).max("fourier".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>n_width$}  {:>width$}  {:>width$}  {:>width$}",
        "n", "exact", "tv", "fourier"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>n_width$}  {:>width$.digits$}  {:>width$.digits$}  {:>width$.digits$}",
            r.n, r.exact, r.tv_bound, r.fourier_bound
        );
    }
    out
}

/// Plain decimal with 17 significant digits.
fn full_precision(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (16 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn render_csv(rows: &[TableRow]) -> CliResult<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Usage(format!("csv output failed: {e}"));
    writer
        .write_record(["n", "exact", "tv_bound", "fourier_bound"])
        .map_err(io)?;
    for r in rows {
        writer
            .write_record([
                r.n.to_string(),
                full_precision(r.exact),
                full_precision(r.tv_bound),
                full_precision(r.fourier_bound),
            ])
            .map_err(io)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

#[derive(Serialize)]
struct MethodRefs {
    exact: &'static str,
    tv_bound: &'static str,
    fourier_bound: &'static str,
}

#[derive(Serialize)]
struct TableMetadata {
    base: f64,
    method_refs: MethodRefs,
    tool_version: &'static str,
}

#[derive(Serialize)]
struct TableDocument<'a> {
    metadata: TableMetadata,
    rows: &'a [TableRow],
}

pub fn render_json(b: f64, rows: &[TableRow]) -> String {
    let doc = TableDocument {
        metadata: TableMetadata {
            base: b,
            method_refs: MethodRefs {
                exact: "exact_uniform: (u ln u - u + 1)/(x - 1), x = b^(1/n), u = (x - 1)/ln x",
                tv_bound: "uniform_log_closed: ln b/(8n)",
                fourier_bound: "fourier_closed: ln b/(2 sqrt(12) n)",
            },
            tool_version: env!("CARGO_PKG_VERSION"),
        },
        rows,
    };
    serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
}

/// The density mini-language accepted by `--density`.
#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `log_b Y` for `Y ~ U[1, b]`.
    UniformLog {
        b: f64,
    },
    /// The same density on `[0, 1]`, named for its folded form.
    ExpOnUnit {
        b: f64,
    },
    Triangular {
        lo: f64,
        peak: f64,
        hi: f64,
    },
    Piecewise(PathBuf),
}

fn parse_number(word: &str, what: &str) -> Result<f64, String> {
    word.parse::<f64>()
        .map_err(|_| format!("{what}: expected a number, got '{word}'"))
}

fn parse_base(word: Option<&str>, kind: &str) -> Result<f64, String> {
    let word = word.ok_or_else(|| format!("{kind} needs b=B"))?;
    let value = word
        .strip_prefix("b=")
        .ok_or_else(|| format!("{kind}: expected b=B, got '{word}'"))?;
    parse_number(value, "base")
}

impl FromStr for DensitySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let Some((&kind, args)) = words.split_first() else {
            return Err("empty density description".into());
        };
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{kind} takes {n} argument(s), got {}", args.len()))
            }
        };
        match kind {
            "uniform" => {
                arity(2)?;
                Ok(DensitySpec::Uniform {
                    lo: parse_number(args[0], "LO")?,
                    hi: parse_number(args[1], "HI")?,
                })
            }
            "uniform-log" => {
                arity(1)?;
                Ok(DensitySpec::UniformLog {
                    b: parse_base(args.first().copied(), kind)?,
                })
            }
            "exp-on-unit" => {
                arity(1)?;
                Ok(DensitySpec::ExpOnUnit {
                    b: parse_base(args.first().copied(), kind)?,
                })
            }
            "triangular" => {
                arity(3)?;
                Ok(DensitySpec::Triangular {
                    lo: parse_number(args[0], "LO")?,
                    peak: parse_number(args[1], "PEAK")?,
                    hi: parse_number(args[2], "HI")?,
                })
            }
            "piecewise" => {
                arity(1)?;
                Ok(DensitySpec::Piecewise(PathBuf::from(args[0])))
            }
            other => Err(format!(
                "unknown density '{other}', expected uniform, uniform-log, exp-on-unit, triangular or piecewise"
            )),
        }
    }
}

impl DensitySpec {
    /// Base of the uniform-log family, if this is one.
    pub fn uniform_log_base(&self) -> Option<f64> {
        match self {
            DensitySpec::UniformLog { b } | DensitySpec::ExpOnUnit { b } => Some(*b),
            _ => None,
        }
    }

    pub fn to_density(&self) -> CliResult<PiecewiseDensity> {
        Ok(match self {
            DensitySpec::Uniform { lo, hi } => PiecewiseDensity::uniform(*lo, *hi)?,
            DensitySpec::UniformLog { b } | DensitySpec::ExpOnUnit { b } => PiecewiseDensity::uniform_log(*b)?,
            DensitySpec::Triangular { lo, peak, hi } => PiecewiseDensity::triangular(*lo, *peak, *hi)?,
            DensitySpec::Piecewise(path) => read_piecewise(path)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SegmentKind {
    Const,
    Linear,
    Exp,
}

/// One entry of a piecewise density file. `null` ends mean ±∞.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSpec {
    lo: Option<f64>,
    hi: Option<f64>,
    kind: SegmentKind,
    params: Vec<f64>,
    #[serde(default)]
    monotonicity: Option<Monotonicity>,
    #[serde(default)]
    convexity: Option<Convexity>,
}

impl SegmentSpec {
    fn build(&self, index: usize) -> CliResult<Segment> {
        let lo = self.lo.unwrap_or(f64::NEG_INFINITY);
        let hi = self.hi.unwrap_or(f64::INFINITY);
        let wrong = |expected: &str| {
            CliError::Usage(format!(
                "segment {index}: {:?} takes params {expected}, got {:?}",
                self.kind, self.params
            ))
        };
        let seg = match (self.kind, self.params.as_slice()) {
            (SegmentKind::Const, &[v]) => Segment::constant(lo, hi, v)?,
            (SegmentKind::Const, _) => return Err(wrong("[value]")),
            (SegmentKind::Linear, &[start, end]) => Segment::linear(lo, hi, start, end)?,
            (SegmentKind::Linear, _) => return Err(wrong("[start, end]")),
            (SegmentKind::Exp, &[scale, rate]) => {
                let anchor = if lo.is_finite() { lo } else { hi };
                Segment::exponential(lo, hi, scale, rate, anchor)?
            }
            (SegmentKind::Exp, &[scale, rate, anchor]) => Segment::exponential(lo, hi, scale, rate, anchor)?,
            (SegmentKind::Exp, _) => return Err(wrong("[scale, rate] or [scale, rate, anchor]")),
        };
        if self.monotonicity.is_none() && self.convexity.is_none() {
            return Ok(seg);
        }
        Ok(seg.with_claimed_shape(
            self.monotonicity.unwrap_or(Monotonicity::Unknown),
            self.convexity.unwrap_or(Convexity::Unknown),
        )?)
    }
}

/// Parses the JSON segment list of a piecewise density.
pub fn parse_piecewise(json: &str) -> CliResult<PiecewiseDensity> {
    let specs: Vec<SegmentSpec> =
        serde_json::from_str(json).map_err(|e| CliError::Usage(format!("invalid piecewise density: {e}")))?;
    let segments = specs
        .iter()
        .enumerate()
        .map(|(i, s)| s.build(i))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PiecewiseDensity::new(segments)?)
}

fn read_piecewise(path: &Path) -> CliResult<PiecewiseDensity> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_piecewise(&text)
}

fn require_uniform_log(spec: &DensitySpec, method: BoundMethod) -> CliResult<f64> {
    spec.uniform_log_base().ok_or_else(|| {
        CliError::Usage(format!(
            "{method} applies only to uniform-log and exp-on-unit densities"
        ))
    })
}

/// Evaluates one bound for `n·X mod 1`, where `X` has the given density.
pub fn run_bound(spec: &DensitySpec, method: BoundMethod, n: u64) -> CliResult<BoundReport> {
    if n == 0 {
        return Err(CliError::Usage("n must be a positive integer".into()));
    }
    let scaled = || -> CliResult<PiecewiseDensity> { Ok(scale_density(&spec.to_density()?, n as f64)?) };
    let report = match method {
        BoundMethod::StepDensity => bound_step_density(&scaled()?)?.with_scale(n as f64),
        BoundMethod::TvQuarter => bound_tv_quarter(&scaled()?)?.with_scale(n as f64),
        BoundMethod::ConvexEighth => {
            let g = scaled()?;
            let (lo, hi) = g.integer_hull();
            let end = |x: f64| x.is_finite().then_some(x as i64);
            bound_convex_eighth(&g, end(lo), end(hi))?.with_scale(n as f64)
        }
        BoundMethod::TvScaled => bound_tv_scaled(&spec.to_density()?, n)?,
        BoundMethod::UniformLogClosed => bound_uniform_log_tv(require_uniform_log(spec, method)?, n)?,
        BoundMethod::FourierParseval => {
            bound_fourier_uniform_log(require_uniform_log(spec, method)?, n, PARSEVAL_TERMS)?
        }
        BoundMethod::FourierClosed => bound_fourier_closed(require_uniform_log(spec, method)?, n)?,
        BoundMethod::ExactUniform => exact_delta_uniform(require_uniform_log(spec, method)?, n as f64)?,
    };
    Ok(report)
}

pub fn render_bound(report: &BoundReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method: {}", report.method);
    let _ = writeln!(out, "value: {}", report.value);
    let _ = writeln!(out, "n: {}", report.n);
    if let Some(b) = report.b {
        let _ = writeln!(out, "base: {b}");
    }
    let _ = writeln!(out, "certified: {}", report.is_certified());
    if !report.hypotheses.is_empty() {
        let _ = writeln!(out, "hypotheses:");
        for h in report.hypotheses_verified() {
            let _ = writeln!(out, "  - {h}");
        }
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

/// Exact distance for `log_b Y / a`, `Y ~ U[1, b]`, with its constants.
pub fn run_exact(b: f64, a: f64) -> CliResult<String> {
    let p = exact_uniform_params(b, a)?;
    let mut out = String::new();
    let _ = writeln!(out, "delta: {}", p.delta);
    let _ = writeln!(out, "x: {}", p.x);
    let _ = writeln!(out, "u: {}", p.u);
    let _ = writeln!(out, "t0: {}", p.t0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Quad,
    MonteCarlo,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quad" => Ok(Engine::Quad),
            "mc" => Ok(Engine::MonteCarlo),
            other => Err(format!("unknown engine '{other}', expected quad or mc")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            samples: 1_000_000,
            seed: 0,
            tol: 1e-10,
        }
    }
}

/// Histogram size for `samples` draws: `⌊√samples⌋`, at most 1000.
pub fn default_bins(samples: u64) -> usize {
    ((samples as f64).sqrt().floor() as usize).clamp(1, 1000)
}

pub fn run_oracle(spec: &DensitySpec, n: u64, engine: Engine, opts: OracleOptions) -> CliResult<OracleResult> {
    let f = spec.to_density()?;
    let result = match engine {
        Engine::Quad => delta_numeric(&f, n, &QuadratureConfig::with_tol(opts.tol))?,
        Engine::MonteCarlo => delta_monte_carlo(
            |rng| f.sample(rng),
            n,
            opts.samples,
            default_bins(opts.samples),
            opts.seed,
        )?,
    };
    Ok(result)
}

pub fn render_oracle(result: &OracleResult) -> String {
    format!(
        "method: {}\nvalue: {}\nerror_estimate: {:e}\ndetail: {}\n",
        result.method, result.value, result.error_estimate, result.detail
    )
}
