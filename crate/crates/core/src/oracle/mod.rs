//! Independent numerical ground truth for `δ(nX mod 1, U[0,1))`.
//!
//! Three engines: adaptive quadrature of `½∫|f_n − 1|` on the folded
//! density, the crossing-point identity `t₀ − F(t₀)` for monotone folded
//! densities, and a seeded Monte Carlo histogram. The last one is a sanity
//! check only: histogram distances are biased low.

pub mod suite;

use std::fmt;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;

use crate::bounds::CONVEX_MONOTONE_CONSTANT;
use crate::density::{fold_mod1, scale_density, FoldedDensity, PiecewiseDensity};
use crate::error::{domain, Error, Result};
use crate::quad;
pub use crate::quad::QuadratureConfig;

/// Translates whose total mass is below this are dropped when folding.
const ORACLE_TAIL_EPSILON: f64 = 1e-12;

/// How far the ends of a folded density may sit from 1 and still count as uniform.
const UNIFORM_END_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    #[serde(rename = "quadrature_L1")]
    QuadratureL1,
    CrossingPoint,
    MonteCarlo,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            OracleMethod::QuadratureL1 => "quadrature_L1",
            OracleMethod::CrossingPoint => "crossing_point",
            OracleMethod::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: OracleMethod,
    pub detail: String,
}

fn folded_breakpoints(folded: &FoldedDensity, cfg: &QuadratureConfig) -> QuadratureConfig {
    let mut out = cfg.clone();
    out.breakpoints.extend(folded.breakpoints());
    out
}

/// `½∫₀¹ |fold(scale(f, n))(t) − 1| dt` by adaptive Simpson, split at the
/// images of segment endpoints and at the crossings of level 1.
pub fn delta_numeric(f: &PiecewiseDensity, n: u64, cfg: &QuadratureConfig) -> Result<OracleResult> {
    if n == 0 {
        return Err(domain("n must be a positive integer"));
    }
    cfg.validate()?;
    let scaled = scale_density(f, n as f64)?;
    let folded = fold_mod1(&scaled, ORACLE_TAIL_EPSILON)?;
    let qcfg = folded_breakpoints(&folded, cfg);
    let est =
        quad::abs_deviation_sided(|t| folded.eval(t), |t| folded.eval_left(t), 0.0, 1.0, 1.0, &qcfg).map_err(|e| {
            match e {
                Error::QuadratureNotConverged {
                    partial,
                    error_estimate,
                } => Error::QuadratureNotConverged {
                    partial: 0.5 * partial,
                    error_estimate: 0.5 * error_estimate,
                },
                other => other,
            }
        })?;
    let truncation = folded.truncation_mass();
    Ok(OracleResult {
        value: 0.5 * est.value,
        error_estimate: 0.5 * est.error + truncation,
        method: OracleMethod::QuadratureL1,
        detail: format!(
            "n = {n}, abs_tol = {:e}, {} breakpoints, {} translates, truncated mass {truncation:e}",
            cfg.abs_tol,
            qcfg.breakpoints.len(),
            folded.shifts().count()
        ),
    })
}

/// `|t₀ − F(t₀)|` where `t₀` is the point at which a monotone folded density
/// crosses 1 and `F` its CDF. Monotonicity is the caller's responsibility.
pub fn delta_crossing_unimodal(folded: &FoldedDensity, cfg: &QuadratureConfig) -> Result<OracleResult> {
    cfg.validate()?;
    let left = folded.eval(0.0);
    let right = folded.eval_left(1.0);
    let truncation = folded.truncation_mass();
    if (left - 1.0) * (right - 1.0) >= 0.0 {
        // A monotone density whose ends both equal 1 is identically 1.
        if (left - 1.0).abs() <= UNIFORM_END_TOLERANCE && (right - 1.0).abs() <= UNIFORM_END_TOLERANCE {
            return Ok(OracleResult {
                value: 0.0,
                error_estimate: UNIFORM_END_TOLERANCE + truncation,
                method: OracleMethod::CrossingPoint,
                detail: "no crossing, folded density is 1 at both ends".into(),
            });
        }
        return Err(Error::NoCrossing { left, right });
    }
    let t0 = quad::bisect(|t| folded.eval(t) - 1.0, 0.0, 1.0, left > 1.0);
    let qcfg = folded_breakpoints(folded, cfg);
    let cdf = quad::integrate_sided(|t| folded.eval(t), |t| folded.eval_left(t), 0.0, t0, &qcfg)?;
    Ok(OracleResult {
        value: (t0 - cdf.value).abs(),
        error_estimate: cdf.error + truncation,
        method: OracleMethod::CrossingPoint,
        detail: format!("t0 = {t0}, F(t0) = {}", cdf.value),
    })
}

/// Histogram estimate `½ Σ |count/samples − 1/bins|` for `n·X mod 1`.
///
/// The reported error combines the histogram noise floor `½√(bins/samples)`
/// with the sampling spread `½/√samples`. The value estimates the binned
/// distance, which never exceeds the true one.
pub fn delta_monte_carlo<S>(mut sampler: S, n: u64, samples: u64, bins: usize, seed: u64) -> Result<OracleResult>
where
    S: FnMut(&mut StdRng) -> f64,
{
    if n == 0 || samples == 0 || bins == 0 {
        return Err(domain("n, samples and bins must be positive"));
    }
    let min_samples = (bins as u64).saturating_mul(bins as u64);
    if samples < min_samples {
        return Err(domain(format!(
            "need at least bins² = {min_samples} samples, got {samples}"
        )));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = vec![0u64; bins];
    let scale = n as f64;
    for _ in 0..samples {
        let x = sampler(&mut rng);
        if !x.is_finite() {
            return Err(Error::NonFiniteSample(x));
        }
        let t = (scale * x).rem_euclid(1.0);
        let bin = ((t * bins as f64) as usize).min(bins - 1);
        counts[bin] += 1;
    }
    let total = samples as f64;
    let expected = 1.0 / bins as f64;
    let value = 0.5 * counts.iter().map(|&c| (c as f64 / total - expected).abs()).sum::<f64>();
    let error_estimate = 0.5 * (bins as f64 / total).sqrt() + 0.5 / total.sqrt();
    Ok(OracleResult {
        value,
        error_estimate,
        method: OracleMethod::MonteCarlo,
        detail: format!("seed = {seed}, samples = {samples}, bins = {bins}, n = {n}; estimate of a lower bound"),
    })
}

/// Outcome of one averaging-inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingCheck {
    /// Mean value `y` of `f` on `[a, b]`.
    pub mean: f64,
    /// `∫_a^b |f − y|`.
    pub integral: f64,
    /// `(b − a)(d − c)/2`, or `/4` in the monotone convex case.
    pub bound: f64,
    pub holds: bool,
    /// `(b − a)(d − c)·8/27` in the monotone convex case (the sharp
    /// constant over that class); equal to `bound` otherwise.
    pub sharp_bound: f64,
    pub holds_sharp: bool,
}

const RANGE_CHECK_POINTS: usize = 257;

/// Checks `∫_a^b |f − y| ≤ (b − a)(d − c)/2` for `f: [a, b] → [c, d]` with
/// mean `y`, or the `/4` form when `convex_monotone` is set.
///
/// The `/4` form is exact for straight lines but fails for other monotone
/// convex functions (`t²` on `[0, 1]` gives `4/(9√3) ≈ 0.2566`). The result
/// also reports the check against the sharp constant `8/27`.
pub fn check_averaging_inequality<F>(
    f: F,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    convex_monotone: bool,
    cfg: &QuadratureConfig,
) -> Result<AveragingCheck>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain(format!("need finite a < b, got [{a}, {b}]")));
    }
    if !(c.is_finite() && d.is_finite() && c <= d) {
        return Err(domain(format!("need finite c ≤ d, got [{c}, {d}]")));
    }
    let slack = 1e-12 * (1.0 + c.abs().max(d.abs()));
    for i in 0..RANGE_CHECK_POINTS {
        let x = a + (b - a) * i as f64 / (RANGE_CHECK_POINTS - 1) as f64;
        let v = f(x);
        if !(v >= c - slack && v <= d + slack) {
            return Err(domain(format!("f({x}) = {v} lies outside [{c}, {d}]")));
        }
    }
    let width = b - a;
    let total = quad::integrate(&f, a, b, cfg)?;
    let mean = total.value / width;
    let dev = quad::abs_deviation(&f, a, b, mean, cfg)?;
    let divisor = if convex_monotone { 4.0 } else { 2.0 };
    let bound = width * (d - c) / divisor;
    let sharp_bound = if convex_monotone {
        width * (d - c) * CONVEX_MONOTONE_CONSTANT
    } else {
        bound
    };
    // Error in the mean moves the integral by at most width·|Δy| = total.error.
    let tolerance = dev.error + total.error + 1e-12 * width * (1.0 + (d - c));
    Ok(AveragingCheck {
        mean,
        integral: dev.value,
        bound,
        holds: dev.value <= bound + tolerance,
        sharp_bound,
        holds_sharp: dev.value <= sharp_bound + tolerance,
    })
}
