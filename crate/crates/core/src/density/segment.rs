use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

pub type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type IntegralFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convexity {
    Convex,
    Concave,
    Neither,
    Unknown,
}

/// Where a segment's shape flags come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeSource {
    /// Derived from the closed form of the profile.
    Analytic,
    /// Supplied by the caller and spot-checked on a grid at construction.
    Asserted,
}

/// The function a segment evaluates.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// Straight line with the given values at `lo` and `hi`.
    Linear {
        start: f64,
        end: f64,
    },
    /// `scale * exp(rate * (x - anchor))`.
    Exponential {
        scale: f64,
        rate: f64,
        anchor: f64,
    },
    Custom {
        eval: EvalFn,
        integral: Option<IntegralFn>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Profile::Linear { start, end } => f
                .debug_struct("Linear")
                .field("start", start)
                .field("end", end)
                .finish(),
            Profile::Exponential { scale, rate, anchor } => f
                .debug_struct("Exponential")
                .field("scale", scale)
                .field("rate", rate)
                .field("anchor", anchor)
                .finish(),
            Profile::Custom { integral, .. } => f
                .debug_struct("Custom")
                .field("closed_form_integral", &integral.is_some())
                .finish(),
        }
    }
}

/// One smooth piece of a density on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Segment {
    lo: f64,
    hi: f64,
    profile: Profile,
    monotonicity: Monotonicity,
    convexity: Convexity,
    source: ShapeSource,
}

const SPOT_CHECK_POINTS: usize = 257;

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if lo.is_nan() || hi.is_nan() || !(lo < hi) {
        return Err(Error::InvalidDensity(format!(
            "segment needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
        return Err(Error::InvalidDensity(format!("empty segment [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_value(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidDensity(format!(
            "{name} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

/// Maps `s ∈ [0, 1]` onto `[lo, hi]`, possibly with infinite ends.
fn unit_map(lo: f64, hi: f64, s: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if s >= 1.0 {
                hi
            } else {
                lo + (hi - lo) * s
            }
        }
        (true, false) => {
            if s >= 1.0 {
                f64::INFINITY
            } else {
                lo + s / (1.0 - s)
            }
        }
        (false, true) => {
            if s <= 0.0 {
                f64::NEG_INFINITY
            } else {
                hi - (1.0 - s) / s
            }
        }
        (false, false) => {
            if s <= 0.0 {
                f64::NEG_INFINITY
            } else if s >= 1.0 {
                f64::INFINITY
            } else {
                (std::f64::consts::PI * (s - 0.5)).tan()
            }
        }
    }
}

impl Segment {
    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Segment> {
        check_interval(lo, hi)?;
        check_value("constant value", value)?;
        if !(lo.is_finite() && hi.is_finite()) && value != 0.0 {
            return Err(Error::InvalidDensity(
                "constant segment on an unbounded interval".into(),
            ));
        }
        Ok(Segment {
            lo,
            hi,
            profile: Profile::Constant(value),
            monotonicity: Monotonicity::Constant,
            convexity: Convexity::Convex,
            source: ShapeSource::Analytic,
        })
    }

    pub fn linear(lo: f64, hi: f64, start: f64, end: f64) -> Result<Segment> {
        check_interval(lo, hi)?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidDensity("linear segment on an unbounded interval".into()));
        }
        check_value("linear start value", start)?;
        check_value("linear end value", end)?;
        let monotonicity = if end > start {
            Monotonicity::Increasing
        } else if end < start {
            Monotonicity::Decreasing
        } else {
            Monotonicity::Constant
        };
        Ok(Segment {
            lo,
            hi,
            profile: Profile::Linear { start, end },
            monotonicity,
            convexity: Convexity::Convex,
            source: ShapeSource::Analytic,
        })
    }

    pub fn exponential(lo: f64, hi: f64, scale: f64, rate: f64, anchor: f64) -> Result<Segment> {
        check_interval(lo, hi)?;
        check_value("exponential scale", scale)?;
        if !rate.is_finite() || !anchor.is_finite() {
            return Err(Error::InvalidDensity(format!(
                "exponential rate and anchor must be finite, got {rate} and {anchor}"
            )));
        }
        if scale > 0.0 {
            if hi == f64::INFINITY && rate >= 0.0 {
                return Err(Error::InvalidDensity(
                    "exponential on [lo, ∞) needs a negative rate".into(),
                ));
            }
            if lo == f64::NEG_INFINITY && rate <= 0.0 {
                return Err(Error::InvalidDensity(
                    "exponential on (-∞, hi] needs a positive rate".into(),
                ));
            }
        }
        let monotonicity = if scale == 0.0 || rate == 0.0 {
            Monotonicity::Constant
        } else if rate > 0.0 {
            Monotonicity::Increasing
        } else {
            Monotonicity::Decreasing
        };
        Ok(Segment {
            lo,
            hi,
            profile: Profile::Exponential { scale, rate, anchor },
            monotonicity,
            convexity: Convexity::Convex,
            source: ShapeSource::Analytic,
        })
    }

    /// A segment backed by an arbitrary evaluator. The shape flags are the
    /// caller's claim; they are spot-checked on a grid and rejected if the
    /// grid contradicts them. Unbounded segments need a closed-form integral.
    pub fn custom(
        lo: f64,
        hi: f64,
        eval: EvalFn,
        integral: Option<IntegralFn>,
        monotonicity: Monotonicity,
        convexity: Convexity,
    ) -> Result<Segment> {
        check_interval(lo, hi)?;
        let bounded = lo.is_finite() && hi.is_finite();
        if !bounded && integral.is_none() {
            return Err(Error::InvalidDensity(
                "an unbounded custom segment needs a closed-form integral".into(),
            ));
        }
        let seg = Segment {
            lo,
            hi,
            profile: Profile::Custom { eval, integral },
            monotonicity,
            convexity,
            source: ShapeSource::Asserted,
        };
        seg.spot_check()?;
        Ok(seg)
    }

    fn spot_check(&self) -> Result<()> {
        let xs: Vec<f64> = (0..SPOT_CHECK_POINTS)
            .map(|i| unit_map(self.lo, self.hi, i as f64 / (SPOT_CHECK_POINTS - 1) as f64))
            .collect();
        let vs: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| match i {
                0 => self.value_at_lo(),
                i if i == SPOT_CHECK_POINTS - 1 => self.value_at_hi(),
                _ => self.eval(x),
            })
            .collect();
        for (&x, &v) in xs.iter().zip(&vs) {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidDensity(format!("custom segment evaluates to {v} at {x}")));
            }
        }
        let finite: Vec<f64> = vs.iter().copied().filter(|v| v.is_finite()).collect();
        let scale = finite.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * (1.0 + scale);
        let violates = match self.monotonicity {
            Monotonicity::Increasing => vs.windows(2).any(|w| w[1] < w[0] - tol),
            Monotonicity::Decreasing => vs.windows(2).any(|w| w[1] > w[0] + tol),
            Monotonicity::Constant => vs.windows(2).any(|w| (w[1] - w[0]).abs() > tol),
            Monotonicity::Unknown => false,
        };
        if violates {
            return Err(Error::HypothesisViolated(format!(
                "custom segment on [{}, {}] is not {:?} on a {SPOT_CHECK_POINTS}-point grid",
                self.lo, self.hi, self.monotonicity
            )));
        }
        if self.lo.is_finite() && self.hi.is_finite() {
            let second = |w: &[f64]| w[0] - 2.0 * w[1] + w[2];
            let violates = match self.convexity {
                Convexity::Convex => vs.windows(3).any(|w| second(w) < -tol),
                Convexity::Concave => vs.windows(3).any(|w| second(w) > tol),
                _ => false,
            };
            if violates {
                return Err(Error::HypothesisViolated(format!(
                    "custom segment on [{}, {}] is not {:?} on a {SPOT_CHECK_POINTS}-point grid",
                    self.lo, self.hi, self.convexity
                )));
            }
            if let Some(closed) = self.closed_form_integral(self.lo, self.hi) {
                let cfg = QuadratureConfig::with_tol(1e-11);
                // Singular integrands are left to the closed form.
                let numeric = quad::integrate(|x| self.eval(x), self.lo, self.hi, &cfg);
                if let (Ok(numeric), true) = (numeric, closed.is_finite()) {
                    if (closed - numeric.value).abs() > 1e-8 * (1.0 + closed.abs()) {
                        return Err(Error::InvalidDensity(format!(
                            "closed-form integral {closed} disagrees with quadrature {}",
                            numeric.value
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Replace the shape flags with caller-supplied ones. For analytic
    /// profiles the flags must agree with the closed form; `Unknown` keeps
    /// the analytic value.
    pub fn with_claimed_shape(mut self, monotonicity: Monotonicity, convexity: Convexity) -> Result<Segment> {
        if self.source == ShapeSource::Asserted {
            self.monotonicity = monotonicity;
            self.convexity = convexity;
            self.spot_check()?;
            return Ok(self);
        }
        let affine = matches!(self.profile, Profile::Constant(_) | Profile::Linear { .. });
        let mono_ok = match monotonicity {
            Monotonicity::Unknown => true,
            m if m == self.monotonicity => true,
            // A constant piece is both non-decreasing and non-increasing.
            Monotonicity::Increasing | Monotonicity::Decreasing => self.monotonicity == Monotonicity::Constant,
            _ => false,
        };
        let conv_ok = match convexity {
            Convexity::Unknown | Convexity::Convex => true,
            Convexity::Concave => affine,
            Convexity::Neither => false,
        };
        if !mono_ok || !conv_ok {
            return Err(Error::HypothesisViolated(format!(
                "claimed shape ({monotonicity:?}, {convexity:?}) contradicts the {:?} profile on [{}, {}]",
                self.profile, self.lo, self.hi
            )));
        }
        Ok(self)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn shape_source(&self) -> ShapeSource {
        self.source
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.profile, Profile::Custom { .. })
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity != Monotonicity::Unknown
    }

    pub fn is_zero(&self) -> bool {
        match self.profile {
            Profile::Constant(v) => v == 0.0,
            Profile::Linear { start, end } => start == 0.0 && end == 0.0,
            Profile::Exponential { scale, .. } => scale == 0.0,
            Profile::Custom { .. } => false,
        }
    }

    /// Evaluates the profile formula at `x` without a range check.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.profile {
            Profile::Constant(v) => *v,
            Profile::Linear { start, end } => {
                let t = (x - self.lo) / (self.hi - self.lo);
                start + (end - start) * t
            }
            Profile::Exponential { scale, rate, anchor } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    scale * (rate * (x - anchor)).exp()
                }
            }
            Profile::Custom { eval, .. } => eval(x),
        }
    }

    /// Limit of the profile at the left end (0 at an infinite end of an integrable piece).
    pub fn value_at_lo(&self) -> f64 {
        match self.profile {
            Profile::Linear { start, .. } => start,
            Profile::Exponential { .. } if self.lo.is_infinite() => 0.0,
            _ => self.eval(self.lo),
        }
    }

    pub fn value_at_hi(&self) -> f64 {
        match self.profile {
            Profile::Linear { end, .. } => end,
            Profile::Exponential { .. } if self.hi.is_infinite() => 0.0,
            _ => self.eval(self.hi),
        }
    }

    /// One-sided slope at `lo` (from the right).
    pub fn slope_at_lo(&self) -> f64 {
        match self.profile {
            Profile::Constant(_) => 0.0,
            Profile::Linear { start, end } => (end - start) / (self.hi - self.lo),
            Profile::Exponential { rate, .. } => rate * self.value_at_lo(),
            Profile::Custom { .. } => {
                if !self.lo.is_finite() {
                    return 0.0;
                }
                let h = 1e-6 * (self.hi - self.lo).min(1.0);
                (self.eval(self.lo + h) - self.value_at_lo()) / h
            }
        }
    }

    /// One-sided slope at `hi` (from the left).
    pub fn slope_at_hi(&self) -> f64 {
        match self.profile {
            Profile::Constant(_) => 0.0,
            Profile::Linear { start, end } => (end - start) / (self.hi - self.lo),
            Profile::Exponential { rate, .. } => rate * self.value_at_hi(),
            Profile::Custom { .. } => {
                if !self.hi.is_finite() {
                    return 0.0;
                }
                let h = 1e-6 * (self.hi - self.lo).min(1.0);
                (self.value_at_hi() - self.eval(self.hi - h)) / h
            }
        }
    }

    pub fn has_closed_form_integral(&self) -> bool {
        !matches!(self.profile, Profile::Custom { integral: None, .. })
    }

    /// `∫_a^b` of the profile for `lo ≤ a ≤ b ≤ hi`, when a closed form exists.
    pub fn closed_form_integral(&self, a: f64, b: f64) -> Option<f64> {
        if b <= a {
            return Some(0.0);
        }
        match &self.profile {
            Profile::Constant(v) => Some(if *v == 0.0 { 0.0 } else { v * (b - a) }),
            Profile::Linear { .. } => Some(0.5 * (b - a) * (self.eval(a) + self.eval(b))),
            Profile::Exponential { scale, rate, anchor } => {
                let (scale, rate, anchor) = (*scale, *rate, *anchor);
                if scale == 0.0 {
                    Some(0.0)
                } else if rate == 0.0 {
                    Some(scale * (b - a))
                } else if a == f64::NEG_INFINITY {
                    Some(scale * (rate * (b - anchor)).exp() / rate)
                } else if b == f64::INFINITY {
                    Some(-scale * (rate * (a - anchor)).exp() / rate)
                } else {
                    Some(scale * (rate * (a - anchor)).exp() * (rate * (b - a)).exp_m1() / rate)
                }
            }
            Profile::Custom { integral, .. } => integral.as_ref().map(|i| i(a, b)),
        }
    }

    /// `∫_a^b` of the profile, falling back to adaptive quadrature.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if b <= a {
            return Ok(0.0);
        }
        if let Some(v) = self.closed_form_integral(a, b) {
            return Ok(v);
        }
        let cfg = QuadratureConfig::with_tol(1e-12 * (b - a).max(1.0));
        Ok(quad::integrate(|x| self.eval(x), a, b, &cfg)?.value)
    }

    pub fn mass(&self) -> Result<f64> {
        self.integral(self.lo, self.hi)
    }

    /// Point in `(a, b)` where a monotone profile equals `level`, if any.
    fn crossing(&self, a: f64, b: f64, level: f64) -> Option<f64> {
        let (fa, fb) = (self.eval(a), self.eval(b));
        let strictly = |x: f64| x > a && x < b;
        if (fa - level) * (fb - level) >= 0.0 {
            return None;
        }
        let x = match self.profile {
            Profile::Linear { start, end } => {
                let t = (level - start) / (end - start);
                self.lo + t * (self.hi - self.lo)
            }
            Profile::Exponential { scale, rate, anchor } => anchor + (level / scale).ln() / rate,
            _ => quad::bisect(|x| self.eval(x) - level, a, b, fa > level),
        };
        Some(x.clamp(a, b)).filter(|x| strictly(*x))
    }

    /// `∫_a^b |f - level|` through closed-form integrals, for monotone pieces
    /// with a closed-form integral. `None` when that route is unavailable.
    pub fn closed_form_abs_deviation(&self, a: f64, b: f64, level: f64) -> Option<f64> {
        let a = a.max(self.lo);
        let b = b.min(self.hi);
        if b <= a {
            return Some(0.0);
        }
        if !self.is_monotone() || !self.has_closed_form_integral() || !(a.is_finite() && b.is_finite()) {
            return None;
        }
        let piece =
            |p: f64, q: f64| -> Option<f64> { Some((self.closed_form_integral(p, q)? - level * (q - p)).abs()) };
        match self.crossing(a, b, level) {
            Some(c) => Some(piece(a, c)? + piece(c, b)?),
            None => piece(a, b),
        }
    }

    /// Position `x` in the segment with `∫_lo^x f = p * mass` for `p ∈ [0, 1]`.
    pub fn inverse_cdf(&self, p: f64, mass: f64) -> f64 {
        let target = p * mass;
        match self.profile {
            Profile::Constant(_) => self.lo + p * (self.hi - self.lo),
            Profile::Linear { start, end } => {
                let slope = (end - start) / (self.hi - self.lo);
                let disc = (start * start + 2.0 * slope * target).max(0.0);
                let denom = start + disc.sqrt();
                let t = if denom > 0.0 { 2.0 * target / denom } else { 0.0 };
                (self.lo + t).min(self.hi)
            }
            Profile::Exponential { scale, rate, anchor } if rate != 0.0 && scale > 0.0 => {
                let x = if self.lo.is_finite() {
                    let at_lo = scale * (rate * (self.lo - anchor)).exp();
                    self.lo + (target * rate / at_lo).ln_1p() / rate
                } else {
                    anchor + (target * rate / scale).ln() / rate
                };
                x.clamp(self.lo, self.hi)
            }
            _ => {
                let cdf = |s: f64| {
                    let x = unit_map(self.lo, self.hi, s);
                    self.integral(self.lo, x).unwrap_or(f64::NAN) - target
                };
                let s = quad::bisect(cdf, 0.0, 1.0, false);
                unit_map(self.lo, self.hi, s)
            }
        }
    }

    /// Density of `n·X` restricted to this piece: `x ↦ f(x/n)/n` on `[n·lo, n·hi]`.
    pub fn scaled(&self, n: f64) -> Segment {
        let profile = match &self.profile {
            Profile::Constant(v) => Profile::Constant(v / n),
            Profile::Linear { start, end } => Profile::Linear {
                start: start / n,
                end: end / n,
            },
            Profile::Exponential { scale, rate, anchor } => Profile::Exponential {
                scale: scale / n,
                rate: rate / n,
                anchor: anchor * n,
            },
            Profile::Custom { eval, integral } => {
                let eval = Arc::clone(eval);
                let integral = integral.as_ref().map(|i| {
                    let i = Arc::clone(i);
                    Arc::new(move |a: f64, b: f64| i(a / n, b / n)) as IntegralFn
                });
                Profile::Custom {
                    eval: Arc::new(move |x: f64| eval(x / n) / n),
                    integral,
                }
            }
        };
        Segment {
            lo: self.lo * n,
            hi: self.hi * n,
            profile,
            monotonicity: self.monotonicity,
            convexity: self.convexity,
            source: self.source,
        }
    }

    /// Variation of the piece over its own closed interval.
    pub(crate) fn variation(&self) -> (f64, bool) {
        if self.is_monotone() {
            return ((self.value_at_hi() - self.value_at_lo()).abs(), false);
        }
        (self.grid_variation(), true)
    }

    /// Grid-refinement variation estimate. Nested grids make the sequence of
    /// estimates non-decreasing; the returned value is a lower bound.
    pub fn grid_variation(&self) -> f64 {
        let mut previous = 0.0;
        for level in 4..=20u32 {
            let v = self.grid_variation_at(level);
            if v.is_infinite() {
                return v;
            }
            if level > 4 && v - previous <= 1e-13 * (1.0 + v) {
                return v;
            }
            previous = v;
        }
        previous
    }

    /// Variation sum over a uniform grid of `2^level + 1` points of the
    /// (reparametrized) interval.
    pub fn grid_variation_at(&self, level: u32) -> f64 {
        let cells = 1usize << level;
        let value = |i: usize| match i {
            0 => self.value_at_lo(),
            i if i == cells => self.value_at_hi(),
            _ => self.eval(unit_map(self.lo, self.hi, i as f64 / cells as f64)),
        };
        let mut prev = value(0);
        let mut total = 0.0;
        for i in 1..=cells {
            let v = value(i);
            total += (v - prev).abs();
            prev = v;
        }
        total
    }
}
