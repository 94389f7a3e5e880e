use super::{BoundMethod, BoundReport, HypothesisStatus};
use crate::density::{
    hull_pieces, tv_full_line, tv_integer_delineated, Convexity, HullPiece, Monotonicity, PiecewiseDensity, Profile,
    Segment, TotalVariation, DEFAULT_TAIL_EPSILON,
};
use crate::error::{domain, require_positive, Error, Result};
use crate::quad::{self, QuadratureConfig};

const SHAPE_GRID_POINTS: usize = 1025;

fn tv_status(f: &PiecewiseDensity, tv: &TotalVariation) -> HypothesisStatus {
    if tv.estimated {
        return HypothesisStatus::GridEstimated;
    }
    f.segments()
        .iter()
        .filter(|s| !s.is_zero())
        .map(HypothesisStatus::of_segment)
        .max()
        .unwrap_or(HypothesisStatus::Analytic)
}

fn finite_tv(tv: TotalVariation, what: &str) -> Result<f64> {
    if tv.is_finite() {
        Ok(tv.value)
    } else {
        Err(Error::VacuousBound(format!("{what} is infinite")))
    }
}

/// `∫_a^b |seg - level|`: closed form when the piece is monotone with a
/// closed-form integral, adaptive quadrature otherwise.
fn segment_abs_deviation(seg: &Segment, a: f64, b: f64, level: f64) -> Result<(f64, f64)> {
    if let Some(v) = seg.closed_form_abs_deviation(a, b, level) {
        return Ok((v, 0.0));
    }
    let cfg = QuadratureConfig::with_tol(1e-12 * (b - a));
    let est = quad::abs_deviation(|x| seg.eval(x), a, b, level, &cfg)?;
    Ok((est.value, est.error))
}

/// `½ Σ_k ∫_k^{k+1} |f - s_k|` with `s_k = ∫_k^{k+1} f`: the L1 distance from
/// `f` to the step density with the same mass per integer cell. The step
/// density folds to exactly uniform, so this bounds `δ(X mod 1, U[0,1))`.
///
/// On unbounded supports cells beyond the tail cut-off are dropped and their
/// mass (which dominates their contribution) is added to the value.
pub fn bound_step_density(f: &PiecewiseDensity) -> Result<BoundReport> {
    let (k_min, k_max, dropped) = f.cell_range(DEFAULT_TAIL_EPSILON)?;
    let mut total = 0.0;
    let mut quad_error = 0.0;
    let mut numeric = false;
    for k in k_min..=k_max {
        let (a, b) = (k as f64, (k + 1) as f64);
        let level = f.mass_between(a, b)?;
        if level == 0.0 {
            continue;
        }
        for piece in hull_pieces(f, a, b) {
            let width = piece.hi - piece.lo;
            match piece.segment {
                None => total += level * width,
                Some(i) => {
                    let seg = &f.segments()[i];
                    let (v, e) = segment_abs_deviation(seg, piece.lo, piece.hi, level)?;
                    numeric |= e > 0.0 || seg.closed_form_abs_deviation(piece.lo, piece.hi, level).is_none();
                    total += v;
                    quad_error += e;
                }
            }
        }
    }
    let value = 0.5 * (total + quad_error) + dropped;
    let mut report = BoundReport::new(BoundMethod::StepDensity, value, 1.0).note(format!("cells {k_min}..={k_max}"));
    if dropped > 0.0 {
        report = report.note(format!("tail mass {dropped:e} added"));
    }
    if numeric {
        report = report.note(format!("quadrature error {quad_error:e} added"));
    }
    Ok(report)
}

/// `TV(f)/4` with `TV` taken over the integer-delineated hull of the support.
pub fn bound_tv_quarter(f: &PiecewiseDensity) -> Result<BoundReport> {
    let tv = tv_integer_delineated(f);
    let value = finite_tv(tv, "integer-delineated total variation")? / 4.0;
    Ok(BoundReport::new(BoundMethod::TvQuarter, value, 1.0)
        .hypothesis("finite total variation on the integer hull", tv_status(f, &tv)))
}

/// `TV(f)/(4n)`: the bound for `nX mod 1` from the variation of `f` itself.
pub fn bound_tv_scaled(f: &PiecewiseDensity, n: u64) -> Result<BoundReport> {
    if n == 0 {
        return Err(domain("n must be a positive integer"));
    }
    let tv = tv_integer_delineated(f);
    let value = finite_tv(tv, "integer-delineated total variation")? / (4.0 * n as f64);
    Ok(BoundReport::new(BoundMethod::TvScaled, value, n as f64)
        .hypothesis("finite total variation on the integer hull", tv_status(f, &tv)))
}

/// Real-scale variant `TV'(f)/(4a)` for `aX mod 1`, using the full-line
/// variation since `a·(integer hull)` is no longer integer-delineated.
pub fn bound_tv_scaled_real(f: &PiecewiseDensity, a: f64) -> Result<BoundReport> {
    require_positive("scale a", a)?;
    let tv = tv_full_line(f);
    let value = finite_tv(tv, "full-line total variation")? / (4.0 * a);
    Ok(BoundReport::new(BoundMethod::TvScaled, value, a)
        .hypothesis("finite total variation on the real line", tv_status(f, &tv))
        .note("real-scale variant (full-line variation)"))
}

/// `ln b/(8n)` for `X = log_b Y`, `Y ~ U[1, b]`.
pub fn bound_uniform_log_tv(b: f64, n: u64) -> Result<BoundReport> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(domain(format!("base must be finite and > 1, got {b}")));
    }
    if n == 0 {
        return Err(domain("n must be a positive integer"));
    }
    Ok(
        BoundReport::new(BoundMethod::UniformLogClosed, b.ln() / (8.0 * n as f64), n as f64)
            .with_base(b)
            .hypothesis(
                format!("density of n·log_b U[1, b] increasing and convex on [0, {n}]"),
                HypothesisStatus::Analytic,
            ),
    )
}

struct PieceShape {
    direction: i8,
    monotone_status: HypothesisStatus,
    convex_status: HypothesisStatus,
}

fn grid_values(seg: &Segment, a: f64, b: f64) -> Option<Vec<f64>> {
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    Some(
        (0..SHAPE_GRID_POINTS)
            .map(|i| {
                let x = a + (b - a) * i as f64 / (SHAPE_GRID_POINTS - 1) as f64;
                seg.eval(x)
            })
            .collect(),
    )
}

fn piece_shape(f: &PiecewiseDensity, piece: &HullPiece) -> Result<PieceShape> {
    let Some(i) = piece.segment else {
        return Ok(PieceShape {
            direction: 0,
            monotone_status: HypothesisStatus::Analytic,
            convex_status: HypothesisStatus::Analytic,
        });
    };
    let seg = &f.segments()[i];
    let where_ = format!("[{}, {}]", piece.lo, piece.hi);
    let status = HypothesisStatus::of_segment(seg);
    let values = || {
        grid_values(seg, piece.lo, piece.hi)
            .ok_or_else(|| Error::HypothesisViolated(format!("cannot grid-check the unbounded piece {where_}")))
    };
    let tol = |v: &[f64]| 1e-9 * (1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs())));

    let (direction, monotone_status) = match seg.monotonicity() {
        Monotonicity::Increasing => (1, status),
        Monotonicity::Decreasing => (-1, status),
        Monotonicity::Constant => (0, status),
        Monotonicity::Unknown => {
            let v = values()?;
            let t = tol(&v);
            let up = v.windows(2).all(|w| w[1] >= w[0] - t);
            let down = v.windows(2).all(|w| w[1] <= w[0] + t);
            let direction = match (up, down) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => -1,
                (false, false) => {
                    return Err(Error::HypothesisViolated(format!(
                        "density is not monotone on {where_}"
                    )));
                }
            };
            (direction, HypothesisStatus::GridEstimated)
        }
    };
    let convex_status = match seg.convexity() {
        Convexity::Convex => status,
        _ if direction == 0 && seg.monotonicity() != Monotonicity::Unknown => status,
        Convexity::Concave | Convexity::Neither => {
            return Err(Error::HypothesisViolated(format!(
                "segment on {where_} is flagged {:?}, not convex",
                seg.convexity()
            )));
        }
        Convexity::Unknown => {
            let v = values()?;
            let t = tol(&v);
            if v.windows(3).any(|w| w[0] - 2.0 * w[1] + w[2] < -t) {
                return Err(Error::HypothesisViolated(format!("density is not convex on {where_}")));
            }
            HypothesisStatus::GridEstimated
        }
    };
    Ok(PieceShape {
        direction,
        monotone_status,
        convex_status,
    })
}

fn slope_at_end(f: &PiecewiseDensity, piece: &HullPiece, right: bool) -> f64 {
    match piece.segment {
        None => 0.0,
        Some(i) => {
            let seg = &f.segments()[i];
            if right {
                seg.slope_at_hi()
            } else {
                seg.slope_at_lo()
            }
        }
    }
}

/// Averaging constant for monotone convex functions in general:
/// `∫|g − ḡ| ≤ κ·(b − a)·(range of g)` with `κ = 8/27`, attained by the hinge
/// `max(0, 1 − 3t/2)` on `[0, 1]`.
pub const CONVEX_MONOTONE_CONSTANT: f64 = 8.0 / 27.0;

/// `(sup f − inf f)/8` over `(lo, hi)` for a density that is monotone and
/// convex there, with `P(lo < X < hi) = 1`. `None` stands for an infinite end.
///
/// The factor 1/8 comes from `κ = 1/4` per integer cell, which holds when
/// the density is a single affine or exponential piece on the cell. Cells
/// holding a join or a custom piece get `κ = 8/27` instead, so the value is
/// `spread/8 + (8/27 − 1/4)/2 · (range on those cells)`.
///
/// Monotonicity and convexity are certified piece by piece (closed form,
/// caller flag, or grid check for unknown flags) together with continuity
/// and non-decreasing one-sided slopes at every interior join.
pub fn bound_convex_eighth(f: &PiecewiseDensity, lo: Option<i64>, hi: Option<i64>) -> Result<BoundReport> {
    let lo_f = lo.map_or(f64::NEG_INFINITY, |v| v as f64);
    let hi_f = hi.map_or(f64::INFINITY, |v| v as f64);
    if !(lo_f < hi_f) {
        return Err(domain(format!("need lo < hi, got ({lo_f}, {hi_f})")));
    }
    let (s_lo, s_hi) = f.support();
    if s_lo < lo_f || s_hi > hi_f {
        return Err(Error::HypothesisViolated(format!(
            "support [{s_lo}, {s_hi}] is not inside ({lo_f}, {hi_f})"
        )));
    }
    let pieces = hull_pieces(f, lo_f, hi_f);
    let shapes = pieces.iter().map(|p| piece_shape(f, p)).collect::<Result<Vec<_>>>()?;

    let mut direction = 0i8;
    for s in &shapes {
        if s.direction != 0 {
            if direction != 0 && direction != s.direction {
                return Err(Error::HypothesisViolated(format!(
                    "density changes monotonicity direction on ({lo_f}, {hi_f})"
                )));
            }
            direction = s.direction;
        }
    }

    for w in pieces.windows(2) {
        let (left, right) = (&w[0], &w[1]);
        let scale = 1.0 + left.right_value.abs().max(right.left_value.abs());
        if (left.right_value - right.left_value).abs() > 1e-9 * scale {
            return Err(Error::HypothesisViolated(format!(
                "density jumps from {} to {} at {}, so it is not convex on ({lo_f}, {hi_f})",
                left.right_value, right.left_value, left.hi
            )));
        }
        let (sl, sr) = (slope_at_end(f, left, true), slope_at_end(f, right, false));
        if sl > sr + 1e-7 * (1.0 + sl.abs().max(sr.abs())) {
            return Err(Error::HypothesisViolated(format!(
                "slope decreases from {sl} to {sr} at {}, so the density is not convex",
                left.hi
            )));
        }
    }

    let first = pieces.first().map_or(0.0, |p| p.left_value);
    let last = pieces.last().map_or(0.0, |p| p.right_value);
    let spread = (last - first).abs();
    if !spread.is_finite() {
        return Err(Error::VacuousBound("density is unbounded on the interval".into()));
    }
    let general_range = general_cell_range(f, &pieces);
    let value = spread / 8.0 + 0.5 * (CONVEX_MONOTONE_CONSTANT - 0.25) * general_range;
    let monotone_status = shapes
        .iter()
        .map(|s| s.monotone_status)
        .max()
        .unwrap_or(HypothesisStatus::Analytic);
    let convex_status = shapes
        .iter()
        .map(|s| s.convex_status)
        .max()
        .unwrap_or(HypothesisStatus::Analytic);
    let interval = format!("({lo_f}, {hi_f})");
    let mut report = BoundReport::new(BoundMethod::ConvexEighth, value, 1.0)
        .hypothesis(format!("support inside {interval}"), HypothesisStatus::Analytic)
        .hypothesis(format!("monotone on {interval}"), monotone_status)
        .hypothesis(format!("convex on {interval}"), convex_status);
    if general_range > 0.0 {
        report = report.note(format!("constant 8/27 on cells with total range {general_range}"));
    }
    Ok(report)
}

fn is_simple_piece(f: &PiecewiseDensity, piece: &HullPiece) -> bool {
    piece.segment.is_none_or(|i| {
        matches!(
            f.segments()[i].profile(),
            Profile::Constant(_) | Profile::Linear { .. } | Profile::Exponential { .. }
        )
    })
}

/// Total range of the density over the integer cells that are not covered
/// by a single affine or exponential piece.
fn general_cell_range(f: &PiecewiseDensity, pieces: &[HullPiece]) -> f64 {
    let mut marked: Vec<i64> = pieces
        .windows(2)
        .map(|w| w[0].hi)
        .filter(|x| x.fract() != 0.0)
        .map(|x| x.floor() as i64)
        .collect();
    marked.dedup();
    let mut total: f64 = marked
        .iter()
        .map(|&k| (f.eval_left((k + 1) as f64) - f.eval(k as f64)).abs())
        .sum();
    for piece in pieces.iter().filter(|p| !is_simple_piece(f, p)) {
        let seg = &f.segments()[piece.segment.expect("gaps are simple")];
        // Ends inside a marked cell are already counted.
        let from = if piece.lo.fract() == 0.0 || !piece.lo.is_finite() {
            piece.lo
        } else {
            piece.lo.ceil()
        };
        let to = if piece.hi.fract() == 0.0 || !piece.hi.is_finite() {
            piece.hi
        } else {
            piece.hi.floor()
        };
        if to > from {
            let at = |x: f64, fallback: f64| if x.is_finite() { seg.eval(x) } else { fallback };
            let lo_value = if from == piece.lo {
                piece.left_value
            } else {
                at(from, piece.left_value)
            };
            let hi_value = if to == piece.hi {
                piece.right_value
            } else {
                at(to, piece.right_value)
            };
            total += (hi_value - lo_value).abs();
        }
    }
    total
}
