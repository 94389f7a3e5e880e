use std::ops::RangeInclusive;

use super::PiecewiseDensity;
use crate::error::Result;

pub const DEFAULT_TAIL_EPSILON: f64 = 1e-12;

/// Density of `X mod 1` on `[0, 1)`, as a finite sum of integer translates.
#[derive(Debug, Clone)]
pub struct FoldedDensity {
    source: PiecewiseDensity,
    k_min: i64,
    k_max: i64,
    truncation_mass: f64,
}

/// Folds `f` modulo 1: `eval(t) = Σ_k f(t + k)` over the cells carrying
/// mass. On unbounded sides translates are dropped once the remaining mass
/// is at most `tail_epsilon`; the dropped mass is reported.
pub fn fold_mod1(f: &PiecewiseDensity, tail_epsilon: f64) -> Result<FoldedDensity> {
    let (k_min, k_max, truncation_mass) = f.cell_range(tail_epsilon)?;
    Ok(FoldedDensity {
        source: f.clone(),
        k_min,
        k_max,
        truncation_mass,
    })
}

impl FoldedDensity {
    pub fn source(&self) -> &PiecewiseDensity {
        &self.source
    }

    pub fn shifts(&self) -> RangeInclusive<i64> {
        self.k_min..=self.k_max
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Right-continuous value at `t ∈ [0, 1)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.sum_translates(t, false)
    }

    /// Left limit at `t ∈ (0, 1]`.
    pub fn eval_left(&self, t: f64) -> f64 {
        self.sum_translates(t, true)
    }

    fn sum_translates(&self, t: f64, left: bool) -> f64 {
        let mut total = 0.0;
        for seg in self.source.segments() {
            let (lo, hi) = (seg.lo(), seg.hi());
            let first = if lo.is_finite() {
                ((lo - t).ceil() as i64 - 1).max(self.k_min)
            } else {
                self.k_min
            };
            let mut k = first;
            while k <= self.k_max {
                let x = t + k as f64;
                let inside = if left { x > lo && x <= hi } else { x >= lo && x < hi };
                if inside {
                    total += seg.eval(x);
                } else if x > hi {
                    break;
                }
                k += 1;
            }
        }
        total
    }

    /// Points of `[0, 1]` where the folded density may have kinks or jumps:
    /// the fractional parts of all segment endpoints, plus 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .source
            .breakpoints()
            .into_iter()
            .map(|x| x - x.floor())
            .chain([0.0, 1.0])
            .collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{scale_density, Segment};
    use crate::quad::{self, QuadratureConfig};
    use approx::assert_abs_diff_eq;

    fn folded_mass(g: &FoldedDensity) -> f64 {
        let cfg = QuadratureConfig::with_tol(1e-12).with_breakpoints(g.breakpoints());
        quad::integrate_sided(|t| g.eval(t), |t| g.eval_left(t), 0.0, 1.0, &cfg)
            .unwrap()
            .value
    }

    #[test]
    fn uniform_is_already_folded() {
        let f = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        let g = fold_mod1(&f, DEFAULT_TAIL_EPSILON).unwrap();
        assert_eq!(g.truncation_mass(), 0.0);
        for &t in &[0.0, 0.25, 0.999] {
            assert_eq!(g.eval(t), 1.0);
        }
    }

    #[test]
    fn uniform_log_folds_to_itself() {
        let f = PiecewiseDensity::uniform_log(10.0).unwrap();
        let g = fold_mod1(&f, DEFAULT_TAIL_EPSILON).unwrap();
        let c = 10f64.ln() / 9.0;
        for &t in &[0.0, 0.3, 0.77] {
            assert_abs_diff_eq!(g.eval(t), c * 10f64.powf(t), epsilon = 1e-14);
        }
    }

    #[test]
    fn doubled_uniform_log_sums_two_translates() {
        let f = PiecewiseDensity::uniform_log(10.0).unwrap();
        let g = fold_mod1(&scale_density(&f, 2.0).unwrap(), DEFAULT_TAIL_EPSILON).unwrap();
        assert_eq!(g.shifts(), 0..=1);
        let c = 10f64.ln() / 18.0;
        for &t in &[0.0, 0.3, 0.77] {
            let expected = c * (10f64.powf(t / 2.0) + 10f64.powf((t + 1.0) / 2.0));
            assert_abs_diff_eq!(g.eval(t), expected, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(folded_mass(&g), 1.0, epsilon = 1e-11);
    }

    #[test]
    fn folding_conserves_mass_with_tails() {
        let peak = 1.0 / (0.5 + 1.0 / 0.7);
        let f = PiecewiseDensity::new(vec![
            Segment::exponential(f64::NEG_INFINITY, 0.3, peak, 2.0, 0.3).unwrap(),
            Segment::exponential(0.3, f64::INFINITY, peak, -0.7, 0.3).unwrap(),
        ])
        .unwrap();
        let g = fold_mod1(&f, 1e-12).unwrap();
        assert!(g.truncation_mass() <= 1e-12);
        assert_abs_diff_eq!(folded_mass(&g), 1.0 - g.truncation_mass(), epsilon = 1e-10);
    }

    #[test]
    fn off_integer_support_folds_with_wraparound() {
        let f = PiecewiseDensity::uniform(0.5, 1.5).unwrap();
        let g = fold_mod1(&f, DEFAULT_TAIL_EPSILON).unwrap();
        assert_eq!(g.shifts(), 0..=1);
        for &t in &[0.0, 0.2, 0.5, 0.9] {
            assert_abs_diff_eq!(g.eval(t), 1.0, epsilon = 1e-15);
        }
        assert_eq!(g.breakpoints(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let f = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        assert!(fold_mod1(&f, 0.0).is_err());
    }
}
