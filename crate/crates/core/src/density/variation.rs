use super::PiecewiseDensity;

/// Total variation of a density, possibly infinite.
///
/// `estimated` is set when some piece had no monotonicity information and
/// its variation came from grid refinement; the value is then a lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalVariation {
    pub value: f64,
    pub estimated: bool,
}

impl TotalVariation {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// A piece of the density on its integer hull: either a segment (clipped to
/// the hull) or a zero-valued gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPiece {
    pub lo: f64,
    pub hi: f64,
    /// Limit from the right at `lo`.
    pub left_value: f64,
    /// Limit from the left at `hi`.
    pub right_value: f64,
    pub variation: f64,
    pub estimated: bool,
    /// Index of the originating segment, `None` for gaps.
    pub segment: Option<usize>,
}

impl HullPiece {
    fn gap(lo: f64, hi: f64) -> HullPiece {
        HullPiece {
            lo,
            hi,
            left_value: 0.0,
            right_value: 0.0,
            variation: 0.0,
            estimated: false,
            segment: None,
        }
    }
}

/// Contiguous pieces covering the closed interval `[lo, hi]`, with zero gaps
/// filled in. Segments entirely outside the interval are skipped; zero
/// segments straddling an end are clipped.
pub fn hull_pieces(f: &PiecewiseDensity, lo: f64, hi: f64) -> Vec<HullPiece> {
    let mut pieces = Vec::new();
    let mut cursor = lo;
    for (i, seg) in f.segments().iter().enumerate() {
        if seg.hi() <= lo || seg.lo() >= hi {
            continue;
        }
        let (a, b) = (seg.lo().max(lo), seg.hi().min(hi));
        if a > cursor {
            pieces.push(HullPiece::gap(cursor, a));
        }
        let (variation, estimated) = if seg.is_zero() { (0.0, false) } else { seg.variation() };
        let left_value = if a == seg.lo() { seg.value_at_lo() } else { seg.eval(a) };
        let right_value = if b == seg.hi() { seg.value_at_hi() } else { seg.eval(b) };
        pieces.push(HullPiece {
            lo: a,
            hi: b,
            left_value,
            right_value,
            variation,
            estimated,
            segment: Some(i),
        });
        cursor = b;
    }
    if cursor < hi {
        pieces.push(HullPiece::gap(cursor, hi));
    }
    pieces
}

fn interior_variation(pieces: &[HullPiece]) -> TotalVariation {
    let within: f64 = pieces.iter().map(|p| p.variation).sum();
    let jumps: f64 = pieces
        .windows(2)
        .map(|w| (w[1].left_value - w[0].right_value).abs())
        .sum();
    let estimated = pieces.iter().any(|p| p.estimated);
    let value = within + jumps;
    TotalVariation {
        value: if value.is_nan() { f64::INFINITY } else { value },
        estimated,
    }
}

/// Total variation over the open interval `(n, m)`, where `[n, m]` is the
/// minimal integer-delineated interval containing the support. Jumps inside
/// `(n, m)`, including those at non-integer support ends, are counted;
/// the jumps to zero at `n` and `m` themselves are not.
pub fn tv_integer_delineated(f: &PiecewiseDensity) -> TotalVariation {
    let (n, m) = f.integer_hull();
    interior_variation(&hull_pieces(f, n, m))
}

/// Total variation over the whole real line, counting the jumps to zero at
/// the ends of the support.
pub fn tv_full_line(f: &PiecewiseDensity) -> TotalVariation {
    let (n, m) = f.integer_hull();
    let pieces = hull_pieces(f, n, m);
    let inner = interior_variation(&pieces);
    let first = pieces.first().map_or(0.0, |p| p.left_value);
    let last = pieces.last().map_or(0.0, |p| p.right_value);
    let value = inner.value + first.abs() + last.abs();
    TotalVariation {
        value: if value.is_nan() { f64::INFINITY } else { value },
        estimated: inner.estimated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{scale_density, Convexity, Monotonicity, Segment};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    /// Independent variation estimate: sum of |Δf| on a fine grid over
    /// `[lo, hi]` using the density's own evaluator.
    fn grid_tv(f: &PiecewiseDensity, lo: f64, hi: f64, points: usize) -> f64 {
        let xs: Vec<f64> = (0..=points)
            .map(|i| lo + (hi - lo) * i as f64 / points as f64)
            .collect();
        xs.windows(2).map(|w| (f.eval(w[1]) - f.eval(w[0])).abs()).sum()
    }

    #[test]
    fn uniform_unit_interval() {
        let f = PiecewiseDensity::uniform(0.0, 1.0).unwrap();
        assert_eq!(tv_integer_delineated(&f).value, 0.0);
        assert_eq!(tv_full_line(&f).value, 2.0);
    }

    #[test]
    fn uniform_on_three_cells() {
        let f = PiecewiseDensity::uniform(0.0, 3.0).unwrap();
        assert_eq!(tv_integer_delineated(&f).value, 0.0);
        assert_abs_diff_eq!(tv_full_line(&f).value, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_log_base_ten() {
        let f = PiecewiseDensity::uniform_log(10.0).unwrap();
        let ln10 = 10f64.ln();
        let tv = tv_integer_delineated(&f);
        assert!(!tv.estimated);
        assert_abs_diff_eq!(tv.value, ln10, epsilon = 1e-14);
        // Rise f(1) - f(0) plus the edge jumps f(0) and f(1): 2 f(1) = 20 ln 10 / 9.
        assert_abs_diff_eq!(tv_full_line(&f).value, 20.0 * ln10 / 9.0, epsilon = 1e-14);
        // Cross-check the full-line value on a grid that straddles the support.
        let grid = grid_tv(&f, -0.5, 1.5, 20_000);
        assert!(grid <= 20.0 * ln10 / 9.0 + 1e-12);
        assert_abs_diff_eq!(grid, 20.0 * ln10 / 9.0, epsilon = 5e-3);
    }

    #[test]
    fn off_integer_support_counts_interior_jumps() {
        // U[0.5, 1.5): hull (0, 2), both jumps are interior.
        let f = PiecewiseDensity::uniform(0.5, 1.5).unwrap();
        assert_abs_diff_eq!(tv_integer_delineated(&f).value, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tv_full_line(&f).value, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn unimodal_continuous_density() {
        let f = PiecewiseDensity::triangular(0.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(tv_integer_delineated(&f).value, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(tv_full_line(&f).value, 2.0, epsilon = 1e-15);
        let g = PiecewiseDensity::new(vec![
            Segment::exponential(f64::NEG_INFINITY, 0.0, 0.5, 1.0, 0.0).unwrap(),
            Segment::exponential(0.0, f64::INFINITY, 0.5, -1.0, 0.0).unwrap(),
        ])
        .unwrap();
        assert_abs_diff_eq!(tv_full_line(&g).value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unknown_monotonicity_uses_grid_lower_bound() {
        let pi = std::f64::consts::PI;
        let f = PiecewiseDensity::new(vec![Segment::custom(
            0.0,
            1.0,
            Arc::new(move |x: f64| 1.0 + 0.5 * (2.0 * pi * x).sin()),
            None,
            Monotonicity::Unknown,
            Convexity::Unknown,
        )
        .unwrap()])
        .unwrap();
        let tv = tv_integer_delineated(&f);
        assert!(tv.estimated);
        assert!(tv.value <= 2.0 + 1e-12);
        assert_abs_diff_eq!(tv.value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn scaling_divides_variation() {
        let f = PiecewiseDensity::uniform_log(10.0).unwrap();
        for n in [2.0, 3.0, 17.0] {
            let g = scale_density(&f, n).unwrap();
            assert_abs_diff_eq!(tv_integer_delineated(&g).value * n, 10f64.ln(), epsilon = 1e-13);
            assert_abs_diff_eq!(tv_full_line(&g).value * n, tv_full_line(&f).value, epsilon = 1e-13);
        }
    }

    #[test]
    fn infinite_endpoint_value_gives_infinite_variation() {
        let f = PiecewiseDensity::new(vec![Segment::custom(
            0.0,
            1.0,
            Arc::new(|x: f64| 0.5 / x.sqrt()),
            Some(Arc::new(|a: f64, b: f64| b.sqrt() - a.sqrt())),
            Monotonicity::Decreasing,
            Convexity::Convex,
        )
        .unwrap()])
        .unwrap();
        assert!(!tv_integer_delineated(&f).is_finite());
    }
}
