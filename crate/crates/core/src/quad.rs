//! Adaptive Simpson quadrature with forced breakpoints.
//!
//! Integrands may jump at breakpoints. Each breakpoint interval `[p, q]` is
//! integrated with the right-continuous value at `p` and the left limit at
//! `q`, so a jump never lands inside a Simpson panel.

use crate::error::{Error, Result};

/// Settings for the adaptive Simpson driver.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub max_depth: u32,
    /// Forced subdivision points. Points outside the integration range are ignored.
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            max_depth: 60,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureConfig {
            abs_tol,
            ..Default::default()
        }
    }

    pub fn with_breakpoints(mut self, breakpoints: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(breakpoints);
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(Error::Domain(format!(
                "abs_tol must be positive and finite, got {}",
                self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::Domain("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// A quadrature value together with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |acc, e| acc + e)
    }
}

struct Accumulator {
    value: f64,
    error: f64,
    failed: bool,
    /// A panel still off by more than the whole tolerance at maximum depth
    /// means the integrand is not resolvable (a hidden jump or a pole).
    budget: f64,
}

impl Accumulator {
    fn new(budget: f64) -> Accumulator {
        Accumulator {
            value: 0.0,
            error: 0.0,
            failed: false,
            budget,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    m: f64,
    fm: f64,
    b: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    max_depth: u32,
    acc: &mut Accumulator,
) {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below this the difference is roundoff, not truncation error.
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    let collapsed = lm <= a || lm >= m || rm <= m || rm >= b;
    if delta.abs() <= 15.0 * tol.max(floor) || collapsed || depth >= max_depth {
        if depth >= max_depth && delta.abs() > 15.0 * acc.budget.max(floor) {
            acc.failed = true;
        }
        acc.value += left + right + delta / 15.0;
        acc.error += delta.abs() / 15.0;
        return;
    }
    let half = 0.5 * tol;
    simpson_recurse(f, a, fa, lm, flm, m, fm, left, half, depth + 1, max_depth, acc);
    simpson_recurse(f, m, fm, rm, frm, b, fb, right, half, depth + 1, max_depth, acc);
}

/// Integrate a function that is smooth on `(a, b)`, given its one-sided
/// endpoint values.
#[allow(clippy::too_many_arguments)]
fn simpson_panel<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    tol: f64,
    max_depth: u32,
    acc: &mut Accumulator,
) {
    if b <= a {
        return;
    }
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(f, a, fa, m, fm, b, fb, whole, tol, 1, max_depth, acc);
}

/// Sorted, deduplicated cut points of `[a, b]`, endpoints included.
pub(crate) fn cut_points(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p.is_finite() && p > a && p < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    cuts
}

fn finish(acc: Accumulator) -> Result<Estimate> {
    if acc.failed || !acc.value.is_finite() {
        Err(Error::QuadratureNotConverged {
            partial: acc.value,
            error_estimate: acc.error,
        })
    } else {
        Ok(Estimate {
            value: acc.value,
            error: acc.error,
        })
    }
}

/// Integrate over `[a, b]` where `f` is right-continuous and `left_limit`
/// gives the limit from the left. Breakpoints in `cfg` split the range.
pub fn integrate_sided<F, L>(f: F, left_limit: L, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration range [{a}, {b}] must be finite")));
    }
    if b <= a {
        return Ok(Estimate::default());
    }
    let cuts = cut_points(a, b, &cfg.breakpoints);
    let mut acc = Accumulator::new(cfg.abs_tol);
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let tol = cfg.abs_tol * (q - p) / (b - a);
        simpson_panel(&f, p, f(p), q, left_limit(q), tol, cfg.max_depth, &mut acc);
    }
    finish(acc)
}

/// Integrate a plain function over `[a, b]`. At breakpoints the left limit is
/// approximated by evaluating one ulp to the left.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate_sided(&f, |x| f(x.next_down()), a, b, cfg)
}

/// Bisection for a sign change of `g` on `(lo, hi)`, given that `g(lo)` has
/// sign `lo_positive`. Stops when the midpoint can no longer move.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, lo_positive: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const SCAN_POINTS: usize = 32;

/// `∫_a^b |f(x) - level| dx` with breakpoints. Sign changes of `f - level`
/// are located by a grid scan plus bisection inside each breakpoint interval,
/// and the pieces between crossings are integrated separately.
pub fn abs_deviation_sided<F, L>(
    f: F,
    left_limit: L,
    a: f64,
    b: f64,
    level: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    L: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration range [{a}, {b}] must be finite")));
    }
    if b <= a {
        return Ok(Estimate::default());
    }
    let dev = |x: f64| (f(x) - level).abs();
    let cuts = cut_points(a, b, &cfg.breakpoints);
    let mut acc = Accumulator::new(cfg.abs_tol);
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let fp = f(p) - level;
        let fq = left_limit(q) - level;

        let mut nodes = Vec::with_capacity(SCAN_POINTS + 1);
        for i in 0..=SCAN_POINTS {
            let x = if i == SCAN_POINTS {
                q
            } else {
                p + (q - p) * i as f64 / SCAN_POINTS as f64
            };
            let v = match i {
                0 => fp,
                SCAN_POINTS => fq,
                _ => f(x) - level,
            };
            nodes.push((x, v));
        }

        let mut pieces = vec![(p, fp.abs())];
        for pair in nodes.windows(2) {
            let ((x0, v0), (x1, v1)) = (pair[0], pair[1]);
            if v0 * v1 < 0.0 {
                let root = bisect(|x| f(x) - level, x0, x1, v0 > 0.0);
                pieces.push((root, dev(root)));
            }
        }
        pieces.push((q, fq.abs()));

        let tol = cfg.abs_tol * (q - p) / (b - a);
        let n_pieces = (pieces.len() - 1) as f64;
        for seg in pieces.windows(2) {
            let ((x0, d0), (x1, d1)) = (seg[0], seg[1]);
            simpson_panel(&dev, x0, d0, x1, d1, tol / n_pieces, cfg.max_depth, &mut acc);
        }
    }
    finish(acc)
}

/// `∫_a^b |f(x) - level| dx` for a plain function; see [`abs_deviation_sided`].
pub fn abs_deviation<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, level: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    abs_deviation_sided(&f, |x| f(x.next_down()), a, b, level, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let cfg = QuadratureConfig::default();
        let est = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, &cfg).unwrap();
        assert_abs_diff_eq!(est.value, 0.0, epsilon = 1e-14);
        let est = integrate(|x| x * x, -1.0, 2.0, &cfg).unwrap();
        assert_abs_diff_eq!(est.value, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_exponential() {
        let cfg = QuadratureConfig::default();
        let est = integrate(f64::exp, 0.0, 1.0, &cfg).unwrap();
        assert_abs_diff_eq!(est.value, std::f64::consts::E - 1.0, epsilon = 1e-10);
        assert!(est.error < 1e-9);
    }

    #[test]
    fn step_with_breakpoint_is_exact() {
        let cfg = QuadratureConfig::default().with_breakpoints([0.3]);
        let est = integrate(|x| if x < 0.3 { 1.0 } else { 5.0 }, 0.0, 1.0, &cfg).unwrap();
        assert_abs_diff_eq!(est.value, 0.3 + 3.5, epsilon = 1e-13);
    }

    #[test]
    fn abs_deviation_of_line_around_its_mean() {
        let cfg = QuadratureConfig::default();
        // Line from 0 to 2 on [0, 1]: mean 1, ∫|f - 1| = 1/2.
        let est = abs_deviation(|x| 2.0 * x, 0.0, 1.0, 1.0, &cfg).unwrap();
        assert_abs_diff_eq!(est.value, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, false);
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = QuadratureConfig {
            abs_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate(|x| x, 0.0, 1.0, &cfg).is_err());
        let cfg = QuadratureConfig {
            max_depth: 0,
            ..Default::default()
        };
        assert!(integrate(|x| x, 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = QuadratureConfig {
            abs_tol: 1e-14,
            max_depth: 3,
            breakpoints: vec![],
        };
        let err = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }
}
