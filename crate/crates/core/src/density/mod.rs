//! Piecewise densities, folding modulo 1 and total variation.

mod fold;
mod segment;
mod variation;

use rand::Rng;

pub use fold::{fold_mod1, FoldedDensity, DEFAULT_TAIL_EPSILON};
pub use segment::{Convexity, EvalFn, IntegralFn, Monotonicity, Profile, Segment, ShapeSource};
pub use variation::{hull_pieces, tv_full_line, tv_integer_delineated, HullPiece, TotalVariation};

use crate::error::{domain, require_positive, Error, Result};

pub const DEFAULT_MASS_TOLERANCE: f64 = 1e-10;

/// Significand of `x` in base `b`: the `r ∈ [1, b)` with `x = r·b^k` for an integer `k`.
pub fn significand(x: f64, b: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("significand needs a positive finite x, got {x}")));
    }
    if !(b > 1.0) || !b.is_finite() {
        return Err(domain(format!("significand needs a finite base b > 1, got {b}")));
    }
    let k = (x.ln() / b.ln()).floor();
    // Split the power so that neither factor over- or underflows.
    let half = (k / 2.0).trunc();
    let mut r = x * b.powf(-half) * b.powf(-(k - half));
    // log is not exact: correct by whole powers of b.
    while r >= b {
        r /= b;
    }
    while r < 1.0 {
        r *= b;
    }
    if r >= b {
        r = 1.0;
    }
    Ok(r)
}

/// A probability density as ordered segments with disjoint interiors.
/// Gaps between segments are zero.
#[derive(Debug, Clone)]
pub struct PiecewiseDensity {
    segments: Vec<Segment>,
    masses: Vec<f64>,
    total_mass_tolerance: f64,
}

impl PiecewiseDensity {
    pub fn new(segments: Vec<Segment>) -> Result<PiecewiseDensity> {
        Self::with_tolerance(segments, DEFAULT_MASS_TOLERANCE)
    }

    pub fn with_tolerance(segments: Vec<Segment>, total_mass_tolerance: f64) -> Result<PiecewiseDensity> {
        require_positive("total_mass_tolerance", total_mass_tolerance)?;
        if segments.is_empty() {
            return Err(Error::InvalidDensity("no segments".into()));
        }
        for pair in segments.windows(2) {
            if pair[1].lo() < pair[0].hi() {
                return Err(Error::InvalidDensity(format!(
                    "segments [{}, {}] and [{}, {}] overlap or are out of order",
                    pair[0].lo(),
                    pair[0].hi(),
                    pair[1].lo(),
                    pair[1].hi()
                )));
            }
        }
        let masses = segments.iter().map(Segment::mass).collect::<Result<Vec<f64>>>()?;
        let total: f64 = masses.iter().sum();
        if !total.is_finite() {
            return Err(Error::InvalidDensity(format!("total mass is {total}")));
        }
        if total == 0.0 || segments.iter().all(Segment::is_zero) {
            return Err(Error::InvalidDensity("density is identically zero".into()));
        }
        if (total - 1.0).abs() > total_mass_tolerance {
            return Err(Error::MassMismatch {
                total,
                tolerance: total_mass_tolerance,
            });
        }
        Ok(PiecewiseDensity {
            segments,
            masses,
            total_mass_tolerance,
        })
    }

    /// Density of `U[lo, hi)`.
    pub fn uniform(lo: f64, hi: f64) -> Result<PiecewiseDensity> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(domain(format!("uniform needs finite lo < hi, got [{lo}, {hi}]")));
        }
        Self::new(vec![Segment::constant(lo, hi, 1.0 / (hi - lo))?])
    }

    /// Density of `log_b Y` for `Y ~ U[1, b]`: `(ln b/(b−1))·b^x` on `[0, 1]`.
    pub fn uniform_log(b: f64) -> Result<PiecewiseDensity> {
        if !(b > 1.0) || !b.is_finite() {
            return Err(domain(format!("base must be finite and > 1, got {b}")));
        }
        let rate = b.ln();
        let scale = (b - 1.0).ln_1p() / (b - 1.0);
        Self::new(vec![Segment::exponential(0.0, 1.0, scale, rate, 0.0)?])
    }

    /// Triangular density on `[lo, hi]` with mode `peak`.
    pub fn triangular(lo: f64, peak: f64, hi: f64) -> Result<PiecewiseDensity> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && lo <= peak && peak <= hi) {
            return Err(domain(format!(
                "triangular needs lo ≤ peak ≤ hi with lo < hi, got ({lo}, {peak}, {hi})"
            )));
        }
        let height = 2.0 / (hi - lo);
        let mut segments = Vec::new();
        if peak > lo {
            segments.push(Segment::linear(lo, peak, 0.0, height)?);
        }
        if hi > peak {
            segments.push(Segment::linear(peak, hi, height, 0.0)?);
        }
        Self::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass_tolerance(&self) -> f64 {
        self.total_mass_tolerance
    }

    /// Right-continuous evaluation (segments are treated as `[lo, hi)`).
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.lo() <= x);
        if idx == 0 {
            return 0.0;
        }
        let seg = &self.segments[idx - 1];
        if x < seg.hi() {
            seg.eval(x)
        } else {
            0.0
        }
    }

    /// Left-continuous evaluation (segments are treated as `(lo, hi]`).
    pub fn eval_left(&self, x: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.lo() < x);
        if idx == 0 {
            return 0.0;
        }
        let seg = &self.segments[idx - 1];
        if x <= seg.hi() {
            seg.eval(x)
        } else {
            0.0
        }
    }

    /// Smallest closed interval outside of which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        let mut nonzero = self.segments.iter().filter(|s| !s.is_zero());
        let first = nonzero.next().expect("validated density has a non-zero segment");
        let last = nonzero.next_back().unwrap_or(first);
        (first.lo(), last.hi())
    }

    /// Minimal integer-delineated interval `[n, m]` containing the support.
    /// Either end may be infinite.
    pub fn integer_hull(&self) -> (f64, f64) {
        let (lo, hi) = self.support();
        (lo.floor(), hi.ceil())
    }

    /// Finite endpoints of all segments.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.lo(), s.hi()])
            .filter(|x| x.is_finite())
            .collect();
        pts.dedup();
        pts
    }

    /// `∫_a^b f`, with closed forms where available. Either end may be infinite.
    pub fn mass_between(&self, a: f64, b: f64) -> Result<f64> {
        let mut total = 0.0;
        for (seg, &m) in self.segments.iter().zip(&self.masses) {
            if seg.hi() <= a || seg.lo() >= b {
                continue;
            }
            if seg.lo() >= a && seg.hi() <= b {
                total += m;
            } else {
                total += seg.integral(a, b)?;
            }
        }
        Ok(total)
    }

    /// Inclusive range of integer cells `[k, k+1)` that carry mass, trimmed
    /// on unbounded sides so that the dropped mass is at most `tail_epsilon`.
    /// Returns `(k_min, k_max, dropped_mass)`.
    pub fn cell_range(&self, tail_epsilon: f64) -> Result<(i64, i64, f64)> {
        require_positive("tail_epsilon", tail_epsilon)?;
        let (lo, hi) = self.support();
        let half = 0.5 * tail_epsilon;
        let mut dropped = 0.0;
        let k_max = if hi.is_finite() {
            hi.ceil() as i64 - 1
        } else {
            let start = self.last_finite_point();
            let (k, tail) = self.search_tail(start, half, |k| self.mass_between(k as f64, f64::INFINITY), 1)?;
            dropped += tail;
            k - 1
        };
        let k_min = if lo.is_finite() {
            lo.floor() as i64
        } else {
            let start = self.first_finite_point();
            let (k, tail) = self.search_tail(start, half, |k| self.mass_between(f64::NEG_INFINITY, k as f64), -1)?;
            dropped += tail;
            k
        };
        Ok((k_min, k_max, dropped))
    }

    fn first_finite_point(&self) -> f64 {
        self.breakpoints().first().copied().unwrap_or(0.0)
    }

    fn last_finite_point(&self) -> f64 {
        self.breakpoints().last().copied().unwrap_or(0.0)
    }

    /// Finds the integer `k` nearest to `start` (moving in `direction`)
    /// with `tail(k) ≤ limit`, by exponential then binary search.
    fn search_tail<T>(&self, start: f64, limit: f64, tail: T, direction: i64) -> Result<(i64, f64)>
    where
        T: Fn(i64) -> Result<f64>,
    {
        const MAX_REACH: i64 = 1 << 40;
        let base = if direction > 0 {
            start.ceil() as i64
        } else {
            start.floor() as i64
        };
        let check = |k: i64| -> Result<f64> {
            let t = tail(k)?;
            if t.is_nan() {
                return Err(Error::UnboundedTail(format!("tail mass at {k} is NaN")));
            }
            Ok(t)
        };
        let mut inside = 0i64;
        let mut step = 1i64;
        let mut t = check(base)?;
        if t <= limit {
            return Ok((base, t));
        }
        loop {
            if step > MAX_REACH {
                return Err(Error::UnboundedTail(format!(
                    "tail mass still above {limit:e} at distance {step} from the support"
                )));
            }
            t = check(base + direction * step)?;
            if t <= limit {
                break;
            }
            inside = step;
            step *= 2;
        }
        let (mut good, mut bad) = (step, inside);
        while good - bad > 1 {
            let mid = bad + (good - bad) / 2;
            let tm = check(base + direction * mid)?;
            if tm <= limit {
                good = mid;
                t = tm;
            } else {
                bad = mid;
            }
        }
        if good == step {
            t = check(base + direction * good)?;
        }
        Ok((base + direction * good, t))
    }

    /// Draws one sample by inverse-CDF sampling within a mass-weighted segment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total: f64 = self.masses.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut idx = self.masses.len() - 1;
        for (i, &m) in self.masses.iter().enumerate() {
            if u < m {
                idx = i;
                break;
            }
            u -= m;
        }
        let mass = self.masses[idx];
        let p = if mass > 0.0 { (u / mass).clamp(0.0, 1.0) } else { 0.0 };
        self.segments[idx].inverse_cdf(p, mass)
    }
}

/// Density of `n·X`: `x ↦ f(x/n)/n`, with segment shape flags preserved.
pub fn scale_density(f: &PiecewiseDensity, n: f64) -> Result<PiecewiseDensity> {
    require_positive("scale factor", n)?;
    Ok(PiecewiseDensity {
        segments: f.segments.iter().map(|s| s.scaled(n)).collect(),
        masses: f.masses.clone(),
        total_mass_tolerance: f.total_mass_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;

    /// Independent significand: repeated multiplication/division by b.
    fn significand_by_division(mut x: f64, b: f64) -> f64 {
        while x >= b {
            x /= b;
        }
        while x < 1.0 {
            x *= b;
        }
        x
    }

    #[test]
    fn significand_examples() {
        assert_eq!(significand(1.0, 10.0).unwrap(), 1.0);
        assert_abs_diff_eq!(significand(0.25, 10.0).unwrap(), 2.5, epsilon = 1e-15);
        let expected = significand_by_division(123.456, 10.0);
        assert_abs_diff_eq!(expected, 1.23456, epsilon = 1e-14);
        assert_abs_diff_eq!(significand(123.456, 10.0).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn significand_rejects_bad_domain() {
        assert!(significand(0.0, 10.0).is_err());
        assert!(significand(-1.0, 10.0).is_err());
        assert!(significand(5.0, 1.0).is_err());
        assert!(significand(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn significand_at_exact_powers_and_extremes() {
        for k in -300..=300 {
            let x = 10f64.powi(k);
            let r = significand(x, 10.0).unwrap();
            assert!((1.0..10.0).contains(&r), "{x} -> {r}");
        }
        for &x in &[f64::MIN_POSITIVE, 5e-324, f64::MAX, 1000.0, 0.001, 8.0, 1024.0] {
            for &b in &[2.0, 10.0, std::f64::consts::E] {
                let r = significand(x, b).unwrap();
                assert!(r >= 1.0 && r < b, "significand({x}, {b}) = {r}");
            }
        }
    }

    proptest! {
        #[test]
        fn significand_in_range_and_consistent(m in 1.0f64..10.0, k in -200i32..200) {
            let x = m * 10f64.powi(k);
            let r = significand(x, 10.0).unwrap();
            prop_assert!((1.0..10.0).contains(&r));
            let back = r * 10f64.powi((x / r).log10().round() as i32);
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_densities() {
        assert!(matches!(
            PiecewiseDensity::new(vec![Segment::constant(0.0, 1.0, 0.0).unwrap()]),
            Err(Error::InvalidDensity(_))
        ));
        assert!(matches!(
            PiecewiseDensity::new(vec![Segment::constant(0.0, 1.0, 0.5).unwrap()]),
            Err(Error::MassMismatch { .. })
        ));
        let overlapping = vec![
            Segment::constant(0.0, 1.0, 0.5).unwrap(),
            Segment::constant(0.5, 1.5, 0.5).unwrap(),
        ];
        assert!(PiecewiseDensity::new(overlapping).is_err());
        assert!(PiecewiseDensity::new(vec![]).is_err());
    }

    #[test]
    fn eval_conventions_at_boundaries() {
        let f = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval_left(0.0), 0.0);
        assert_eq!(f.eval_left(1.0), 1.0);
        assert_eq!(f.eval(-0.5), 0.0);
    }

    #[test]
    fn constructors_have_unit_mass() {
        for f in [
            PiecewiseDensity::uniform(-2.0, 3.5).unwrap(),
            PiecewiseDensity::uniform_log(10.0).unwrap(),
            PiecewiseDensity::uniform_log(1.0001).unwrap(),
            PiecewiseDensity::triangular(0.0, 1.0, 2.0).unwrap(),
            PiecewiseDensity::triangular(0.0, 0.0, 3.0).unwrap(),
        ] {
            assert_abs_diff_eq!(
                f.mass_between(f64::NEG_INFINITY, f64::INFINITY).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn scaling_preserves_mass_and_shape() {
        let f = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        let g = scale_density(&f, 2.0).unwrap();
        assert_eq!(g.support(), (0.0, 2.0));
        assert_abs_diff_eq!(g.eval(1.3), 0.5, epsilon = 1e-15);

        let f = PiecewiseDensity::uniform_log(10.0).unwrap();
        let n = 7.0;
        let g = scale_density(&f, n).unwrap();
        assert_eq!(g.support(), (0.0, n));
        let c = 10f64.ln() / 9.0;
        for &x in &[0.0, 1.5, 3.3, 6.9] {
            let expected = c * 10f64.powf(x / n) / n;
            assert_abs_diff_eq!(g.eval(x), expected, epsilon = 1e-14);
        }
        assert_eq!(g.segments()[0].monotonicity(), Monotonicity::Increasing);
        let mass = g.segments()[0].mass().unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-14);
        assert!(scale_density(&f, 0.0).is_err());
        assert!(scale_density(&f, -1.0).is_err());
    }

    #[test]
    fn cell_range_for_unbounded_tail() {
        let f = PiecewiseDensity::new(vec![Segment::exponential(0.0, f64::INFINITY, 1.0, -1.0, 0.0).unwrap()]).unwrap();
        let (k_min, k_max, dropped) = f.cell_range(1e-12).unwrap();
        assert_eq!(k_min, 0);
        // e^{-K} ≤ 5e-13 first at K = 29.
        assert_eq!(k_max, 28);
        assert!(dropped <= 5e-13 && dropped > 0.0);

        let two_sided = PiecewiseDensity::new(vec![
            Segment::exponential(f64::NEG_INFINITY, 0.0, 0.5, 1.0, 0.0).unwrap(),
            Segment::exponential(0.0, f64::INFINITY, 0.5, -1.0, 0.0).unwrap(),
        ])
        .unwrap();
        let (k_min, k_max, dropped) = two_sided.cell_range(1e-10).unwrap();
        assert_eq!((k_min, k_max), (-24, 23));
        assert!(dropped <= 1e-10);
    }

    #[test]
    fn sampling_matches_cdf() {
        let f = PiecewiseDensity::triangular(0.0, 1.0, 3.0).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let n = 200_000;
        let below: usize = (0..n).filter(|_| f.sample(&mut rng) < 1.0).count();
        assert_abs_diff_eq!(below as f64 / n as f64, 1.0 / 3.0, epsilon = 5e-3);
    }
}
