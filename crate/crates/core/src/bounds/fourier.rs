use std::f64::consts::PI;

use num_complex::Complex64;

use super::{BoundMethod, BoundReport, HypothesisStatus};
use crate::error::{domain, Error, Result};

/// Above this `K` the tail of `Σ 1/k²` comes from Euler–Maclaurin instead
/// of a direct sum.
const ZETA2_DIRECT_LIMIT: u64 = 1_000_000;

fn check_base(b: f64) -> Result<()> {
    if !(b > 1.0) || !b.is_finite() {
        return Err(domain(format!("base must be finite and > 1, got {b}")));
    }
    Ok(())
}

/// `∫_0^1 f(x) e^{-2πikx} dx` for `f(x) = (ln b/(b−1))·b^x`, which is
/// `ln b/(ln b − 2πik)`.
pub fn fourier_coeff_uniform_log(b: f64, k: i64) -> Result<Complex64> {
    check_base(b)?;
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let l = b.ln();
    Ok(Complex64::new(l, 0.0) / Complex64::new(l, -2.0 * PI * k as f64))
}

/// Upper bound on `Σ_{k>K} 1/k²`.
pub fn zeta2_tail(k: u64) -> f64 {
    if k == 0 {
        return PI * PI / 6.0;
    }
    if k > ZETA2_DIRECT_LIMIT {
        // Truncating the asymptotic series after the 1/(6K³) term overestimates.
        let kf = k as f64;
        return 1.0 / kf - 1.0 / (2.0 * kf * kf) + 1.0 / (6.0 * kf * kf * kf);
    }
    let head: f64 = (1..=k).rev().map(|j| 1.0 / (j as f64 * j as f64)).sum();
    // Roundoff slack for the subtraction and the k-term sum.
    (PI * PI / 6.0 - head).max(0.0) + 4.0 * k as f64 * f64::EPSILON
}

/// Tail bound for the uniform-log coefficients at multiples of `n`:
/// `Σ_{|k|>K} |f̂(nk)|² < (ln b)²/(2π²n²) · Σ_{k>K} 1/k²`.
pub fn uniform_log_tail_bound(b: f64, n: u64) -> impl Fn(u64) -> f64 {
    let l = b.ln();
    let nf = n as f64;
    move |k_max| l * l / (2.0 * PI * PI * nf * nf) * zeta2_tail(k_max)
}

fn coefficient_energy<C: Fn(i64) -> Complex64>(coeffs: &C, n: u64, k_max: u64) -> Result<f64> {
    let n = i64::try_from(n).map_err(|_| domain("n is too large"))?;
    let mut sum = 0.0;
    for k in 1..=k_max {
        let k = i64::try_from(k).map_err(|_| domain("k_max is too large"))?;
        let m = n.checked_mul(k).ok_or_else(|| domain("n·k overflows"))?;
        sum += coeffs(m).norm_sqr() + coeffs(-m).norm_sqr();
    }
    Ok(sum)
}

/// `½·sqrt(Σ_{0<|k|≤K} |f̂(nk)|²)` without any tail: non-decreasing in `K`
/// and a lower estimate of the full Parseval quantity.
pub fn parseval_partial<C: Fn(i64) -> Complex64>(coeffs: C, n: u64, k_max: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n must be a positive integer"));
    }
    Ok(0.5 * coefficient_energy(&coeffs, n, k_max)?.sqrt())
}

/// `½·sqrt(Σ_{0<|k|≤K} |f̂(nk)|² + tail(K))`, an upper bound on
/// `δ(nX mod 1, U[0,1))` for a density on `[0, 1)` in L², provided
/// `tail(K)` dominates `Σ_{|k|>K} |f̂(nk)|²`.
pub fn bound_fourier_parseval<C, T>(coeffs: C, n: u64, k_max: u64, tail_bound: Option<T>) -> Result<BoundReport>
where
    C: Fn(i64) -> Complex64,
    T: Fn(u64) -> f64,
{
    if n == 0 || k_max == 0 {
        return Err(domain("n and k_max must be positive integers"));
    }
    let tail_bound = tail_bound.ok_or_else(|| {
        Error::MissingTailBound("coefficient decay is unknown, so the truncated sum is not a bound".into())
    })?;
    let tail = tail_bound(k_max);
    if !(tail >= 0.0) || !tail.is_finite() {
        return Err(domain(format!(
            "tail bound must be finite and non-negative, got {tail}"
        )));
    }
    let energy = coefficient_energy(&coeffs, n, k_max)?;
    let value = 0.5 * (energy + tail).sqrt();
    Ok(BoundReport::new(BoundMethod::FourierParseval, value, n as f64)
        .hypothesis(
            "tail bound dominates the omitted coefficients",
            HypothesisStatus::CallerAsserted,
        )
        .note(format!("k_max = {k_max}"))
        .note(format!("partial energy {energy:e}, tail bound {tail:e}")))
}

/// Parseval bound for the uniform-log density with its analytic tail bound.
pub fn bound_fourier_uniform_log(b: f64, n: u64, k_max: u64) -> Result<BoundReport> {
    check_base(b)?;
    let coeffs = move |k: i64| fourier_coeff_uniform_log(b, k).expect("base checked above");
    let mut report = bound_fourier_parseval(coeffs, n, k_max, Some(uniform_log_tail_bound(b, n)))?;
    report.hypotheses[0].status = HypothesisStatus::Analytic;
    Ok(report.with_base(b))
}

/// `ln b/(2·√12·n)` for `X = log_b Y`, `Y ~ U[1, b]`.
pub fn bound_fourier_closed(b: f64, n: u64) -> Result<BoundReport> {
    check_base(b)?;
    if n == 0 {
        return Err(domain("n must be a positive integer"));
    }
    let value = b.ln() / (2.0 * 12f64.sqrt() * n as f64);
    Ok(BoundReport::new(BoundMethod::FourierClosed, value, n as f64)
        .with_base(b)
        .hypothesis(
            "|f̂(k)| < ln b/(2π|k|) for the uniform-log density",
            HypothesisStatus::Analytic,
        ))
}
