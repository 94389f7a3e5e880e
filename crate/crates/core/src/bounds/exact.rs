use serde::Serialize;

use super::{BoundMethod, BoundReport, HypothesisStatus};
use crate::error::{domain, require_positive, Result};

/// Below this `y = ln b / a` the quantities are taken from their series.
const SERIES_CUTOFF: f64 = 1e-3;

/// Constants for `X = log_b Y / a`, `Y ~ U[1, b]`, i.e. `X mod 1` with
/// density proportional to `x^t` on `[0, 1)`, `x = b^{1/a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactUniformParams {
    pub b: f64,
    pub a: f64,
    /// `ln x = ln b / a`.
    pub log_x: f64,
    pub x: f64,
    /// `(x - 1)/ln x`; the folded density equals one where `x^t = u`.
    pub u: f64,
    /// Crossing point `ln u / ln x` where the folded density equals one.
    pub t0: f64,
    /// The distance `(u ln u - u + 1)/(x - 1)`.
    pub delta: f64,
}

/// `u - 1 = expm1(y)/y - 1`, accurate for small `y`.
fn u_minus_one(y: f64) -> f64 {
    if y < SERIES_CUTOFF {
        y / 2.0 + y * y / 6.0 + y.powi(3) / 24.0 + y.powi(4) / 120.0 + y.powi(5) / 720.0
    } else {
        y.exp_m1() / y - 1.0
    }
}

/// `(1 + w) ln(1 + w) - w`, accurate for small `w`.
fn entropy_gap(w: f64) -> f64 {
    if w < SERIES_CUTOFF {
        (2..=8)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * w.powi(j) / f64::from(j * (j - 1))
            })
            .sum()
    } else {
        (1.0 + w) * w.ln_1p() - w
    }
}

pub fn exact_uniform_params(b: f64, a: f64) -> Result<ExactUniformParams> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(domain(format!("base must be finite and > 1, got {b}")));
    }
    require_positive("exponent a", a)?;
    let y = b.ln() / a;
    if !(y > 0.0) {
        return Err(domain(format!("ln b / a underflows to zero for b = {b}, a = {a}")));
    }
    let w = u_minus_one(y);
    let x_minus_one = y.exp_m1();
    Ok(ExactUniformParams {
        b,
        a,
        log_x: y,
        x: y.exp(),
        u: 1.0 + w,
        t0: w.ln_1p() / y,
        delta: entropy_gap(w) / x_minus_one,
    })
}

/// `δ(log_b Y / a mod 1, U[0,1))` for `Y ~ U[1, b]`, in closed form.
pub fn exact_delta_uniform(b: f64, a: f64) -> Result<BoundReport> {
    let p = exact_uniform_params(b, a)?;
    Ok(BoundReport::new(BoundMethod::ExactUniform, p.delta, a)
        .with_base(b)
        .hypothesis("Y uniform on [1, b]", HypothesisStatus::Analytic)
        .note(format!("crossing point t0 = {}", p.t0)))
}

/// CDF of `log_b Y / a mod 1` at `t ∈ [0, 1]`: `(x^t - 1)/(x - 1)`.
pub fn folded_cdf_uniform(b: f64, a: f64, t: f64) -> Result<f64> {
    let p = exact_uniform_params(b, a)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t must lie in [0, 1], got {t}")));
    }
    Ok((t * p.log_x).exp_m1() / p.log_x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{self, QuadratureConfig};
    use approx::assert_abs_diff_eq;

    const TABLE: [(f64, f64); 11] = [
        (1.0, 0.268_843_449_9),
        (2.0, 0.141_337_868_4),
        (3.0, 0.095_166_194_0),
        (4.0, 0.071_627_038_3),
        (5.0, 0.057_395_865_8),
        (8.0, 0.035_936_572_5),
        (10.0, 0.028_761_144_0),
        (20.0, 0.014_388_508_3),
        (50.0, 0.005_756_293_2),
        (100.0, 0.002_878_210_2),
        (1000.0, 0.000_287_823_1),
    ];

    #[test]
    fn base_ten_values() {
        for (a, expected) in TABLE {
            let d = exact_delta_uniform(10.0, a).unwrap().value;
            assert_abs_diff_eq!(d, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn delta_is_the_cdf_gap_at_the_crossing() {
        for b in [2.0, std::f64::consts::E, 10.0, 100.0] {
            for a in [0.5, 1.0, 3.0, 40.0] {
                let p = exact_uniform_params(b, a).unwrap();
                let f_t0 = folded_cdf_uniform(b, a, p.t0).unwrap();
                assert_abs_diff_eq!(p.t0 - f_t0, p.delta, epsilon = 1e-14);
                assert!(p.u > 1.0 && p.u < p.x);
                assert!(p.t0 > 0.0 && p.t0 < 1.0);
            }
        }
    }

    #[test]
    fn delta_matches_direct_quadrature() {
        // ½∫|f - 1| with f(t) = y e^{ty}/(e^y - 1).
        for (b, a) in [(10.0, 1.0), (2.0, 1.0), (100.0, 7.0)] {
            let y: f64 = f64::ln(b) / a;
            let f = move |t: f64| y * (t * y).exp() / y.exp_m1();
            let cfg = QuadratureConfig::with_tol(1e-13);
            let l1 = quad::abs_deviation(f, 0.0, 1.0, 1.0, &cfg).unwrap().value;
            assert_abs_diff_eq!(0.5 * l1, exact_delta_uniform(b, a).unwrap().value, epsilon = 1e-11);
        }
    }

    #[test]
    fn decreasing_in_the_exponent() {
        let mut previous = f64::INFINITY;
        for a in [0.1, 0.5, 1.0, 2.0, 10.0, 1e3, 1e6, 1e9] {
            let d = exact_delta_uniform(10.0, a).unwrap().value;
            assert!(d < previous && d > 0.0);
            previous = d;
        }
        assert!(previous < 1e-9);
    }

    #[test]
    fn depends_only_on_log_ratio() {
        for (b, a) in [(10.0, 1.0), (3.0, 2.5), (1.5, 100.0)] {
            let d1 = exact_delta_uniform(b, a).unwrap().value;
            let d2 = exact_delta_uniform(b * b, 2.0 * a).unwrap().value;
            assert_abs_diff_eq!(d1, d2, epsilon = 1e-14);
        }
    }

    #[test]
    fn series_agree_with_direct_forms_at_the_cutoff() {
        for y in [0.5 * SERIES_CUTOFF, SERIES_CUTOFF * (1.0 - 1e-9)] {
            let direct = y.exp_m1() / y - 1.0;
            assert_abs_diff_eq!(u_minus_one(y) / direct, 1.0, epsilon = 1e-9);
            let w = u_minus_one(y);
            let direct = (1.0 + w) * w.ln_1p() - w;
            assert_abs_diff_eq!(entropy_gap(w) / direct, 1.0, epsilon = 1e-7);
        }
        // Leading behaviour δ ≈ y/8 for small y.
        let y: f64 = 1e-6;
        assert_abs_diff_eq!(
            exact_uniform_params(y.exp(), 1.0).unwrap().delta / y,
            0.125,
            epsilon = 1e-6
        );
    }

    #[test]
    fn cdf_endpoints_and_domain() {
        assert_eq!(folded_cdf_uniform(10.0, 1.0, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(folded_cdf_uniform(10.0, 1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            folded_cdf_uniform(10.0, 1.0, 0.5).unwrap(),
            (10f64.sqrt() - 1.0) / 9.0,
            epsilon = 1e-15
        );
        assert!(folded_cdf_uniform(10.0, 1.0, 1.5).is_err());
        assert!(exact_delta_uniform(1.0, 1.0).is_err());
        assert!(exact_delta_uniform(10.0, 0.0).is_err());
        assert!(exact_delta_uniform(10.0, -2.0).is_err());
    }
}
