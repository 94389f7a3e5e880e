//! Seeded random inputs for the property harnesses.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::density::{PiecewiseDensity, Segment};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
enum RawProfile {
    Constant(f64),
    Linear(f64, f64),
    Exponential { scale: f64, rate: f64 },
}

fn build(lo: f64, hi: f64, p: RawProfile, factor: f64) -> Result<Segment> {
    match p {
        RawProfile::Constant(v) => Segment::constant(lo, hi, v * factor),
        RawProfile::Linear(s, e) => Segment::linear(lo, hi, s * factor, e * factor),
        RawProfile::Exponential { scale, rate } => Segment::exponential(lo, hi, scale * factor, rate, lo),
    }
}

fn random_profile<R: Rng>(rng: &mut R) -> RawProfile {
    match rng.gen_range(0..10) {
        0 => RawProfile::Constant(0.0),
        1..=3 => RawProfile::Constant(rng.gen_range(0.1..2.0)),
        4..=6 => RawProfile::Linear(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)),
        _ => RawProfile::Exponential {
            scale: rng.gen_range(0.1..2.0),
            rate: rng.gen_range(-3.0..3.0),
        },
    }
}

/// A normalized mixture of constant, linear and exponential pieces whose
/// support spans between one and five integer cells. Ends and internal
/// breakpoints are sometimes off the integers.
pub fn random_density<R: Rng>(rng: &mut R) -> PiecewiseDensity {
    loop {
        let cells = rng.gen_range(1..=5);
        let k0: i64 = rng.gen_range(-3..=3);
        let mut lo = k0 as f64;
        let mut hi = (k0 + cells) as f64;
        if rng.gen_bool(0.3) {
            lo += rng.gen_range(0.05..0.45);
        }
        if rng.gen_bool(0.3) {
            hi -= rng.gen_range(0.05..0.45);
        }
        let pieces = rng.gen_range(1..=2 * cells as usize);
        let mut cuts: Vec<f64> = (1..pieces)
            .map(|_| {
                let x: f64 = rng.gen_range(lo..hi);
                if rng.gen_bool(0.3) && x.round() > lo && x.round() < hi {
                    x.round()
                } else {
                    x
                }
            })
            .collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let raw: Vec<(f64, f64, RawProfile)> = cuts.windows(2).map(|w| (w[0], w[1], random_profile(rng))).collect();
        let unit: Option<Vec<Segment>> = raw.iter().map(|&(a, b, p)| build(a, b, p, 1.0).ok()).collect();
        let Some(unit) = unit else { continue };
        let total: f64 = match unit.iter().map(Segment::mass).sum::<Result<f64>>() {
            Ok(t) if t > 1e-3 => t,
            _ => continue,
        };
        let segments: Option<Vec<Segment>> = raw.iter().map(|&(a, b, p)| build(a, b, p, 1.0 / total).ok()).collect();
        if let Some(Ok(f)) = segments.map(PiecewiseDensity::new) {
            return f;
        }
    }
}

/// `count` random densities from one seeded generator.
pub fn density_suite(count: usize, seed: u64) -> Vec<PiecewiseDensity> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_density(&mut rng)).collect()
}

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function `f: [a, b] → [c, d]` for the averaging inequalities.
#[derive(Clone)]
pub struct TestFunction {
    pub label: &'static str,
    pub f: RealFn,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Points where `f` jumps or kinks.
    pub breakpoints: Vec<f64>,
    pub convex_monotone: bool,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("d", &self.d)
            .field("breakpoints", &self.breakpoints)
            .field("convex_monotone", &self.convex_monotone)
            .finish()
    }
}

/// Wraps `h: [0, 1] → [0, 1]` into a function on random `[a, b] → [c, d]`.
fn embed<R: Rng>(
    rng: &mut R,
    label: &'static str,
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    unit_breaks: &[f64],
    convex_monotone: bool,
) -> TestFunction {
    let a = rng.gen_range(-2.0..2.0);
    let b = a + rng.gen_range(0.1..3.0);
    let c = rng.gen_range(-2.0..2.0);
    let d = c + rng.gen_range(0.01..3.0);
    let f = move |x: f64| {
        let t = ((x - a) / (b - a)).clamp(0.0, 1.0);
        c + (d - c) * h(t).clamp(0.0, 1.0)
    };
    TestFunction {
        label,
        f: Arc::new(f),
        a,
        b,
        c,
        d,
        breakpoints: unit_breaks.iter().map(|s| a + (b - a) * s).collect(),
        convex_monotone,
    }
}

/// Monotone convex functions: powers, exponentials and hinges, increasing
/// or decreasing.
pub fn random_monotone_convex<R: Rng>(rng: &mut R) -> TestFunction {
    let flip = rng.gen_bool(0.5);
    let orient = move |t: f64| if flip { 1.0 - t } else { t };
    match rng.gen_range(0..3) {
        0 => {
            let p = rng.gen_range(1.0..6.0);
            embed(rng, "power", move |t| orient(t).powf(p), &[], true)
        }
        1 => {
            let r = rng.gen_range(0.1..8.0);
            embed(
                rng,
                "exponential",
                move |t| (r * orient(t)).exp_m1() / r.exp_m1(),
                &[],
                true,
            )
        }
        _ => {
            let s: f64 = rng.gen_range(0.05..0.95);
            let kink = if flip { 1.0 - s } else { s };
            embed(
                rng,
                "hinge",
                move |t| (orient(t) - s).max(0.0) / (1.0 - s),
                &[kink],
                true,
            )
        }
    }
}

/// Bounded functions with no shape constraint: step functions, Bernstein
/// polynomials, oscillations and exponentials of either convexity.
pub fn random_bounded<R: Rng>(rng: &mut R) -> TestFunction {
    match rng.gen_range(0..4) {
        0 => {
            let k = rng.gen_range(2..=6);
            let mut breaks: Vec<f64> = (1..k).map(|_| rng.gen_range(0.0..1.0)).collect();
            breaks.sort_by(f64::total_cmp);
            let values: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let cuts = breaks.clone();
            let h = move |t: f64| values[cuts.partition_point(|&s| s <= t)];
            embed(rng, "step", h, &breaks, false)
        }
        1 => {
            let coeffs: Vec<f64> = (0..rng.gen_range(2..=8)).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let h = move |t: f64| bernstein(&coeffs, t);
            embed(rng, "bernstein", h, &[], false)
        }
        2 => {
            let w = rng.gen_range(0.5..30.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            embed(
                rng,
                "oscillation",
                move |t| 0.5 * (1.0 + (w * t + phase).sin()),
                &[],
                false,
            )
        }
        _ => {
            let mut r: f64 = rng.gen_range(-8.0..8.0);
            if r.abs() < 1e-3 {
                r = 1.0;
            }
            embed(rng, "exponential", move |t| (r * t).exp_m1() / r.exp_m1(), &[], false)
        }
    }
}

/// Bernstein polynomial with the given control values; stays within their range.
fn bernstein(coeffs: &[f64], t: f64) -> f64 {
    // de Casteljau
    let mut work = coeffs.to_vec();
    for level in 1..work.len() {
        for i in 0..work.len() - level {
            work[i] = (1.0 - t) * work[i] + t * work[i + 1];
        }
    }
    work[0]
}
