use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Shortest series accepted by the estimators.
pub const MIN_SERIES_LEN: usize = 100;

/// Biased empirical autocovariances `γ_k = (1/T) Σ_t (x_t − x̄)(x_{t+k} − x̄)` for
/// `k = 0..T`, by zero-padded FFT.
pub fn autocovariance(series: &[f64]) -> Vec<f64> {
    let t = series.len();
    if t == 0 {
        return Vec::new();
    }
    let mean = series.iter().sum::<f64>() / t as f64;
    let len = (2 * t).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / (len as f64 * t as f64);
    buf[..t].iter().map(|z| z.re * scale).collect()
}

fn check_series(series: &[f64]) -> Result<()> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: MIN_SERIES_LEN,
        });
    }
    if let Some((i, v)) = series.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite {
            value: *v,
            context: format!("series element {i}"),
        });
    }
    Ok(())
}

/// Sample variance `γ_0` and the Geyer initial-positive-sequence estimate of the
/// asymptotic variance `σ² = γ_0 + 2 Σ_{k≥1} γ_k`.
fn variance_pair(series: &[f64]) -> Result<(f64, f64)> {
    check_series(series)?;
    let gamma = autocovariance(series);
    let g0 = gamma[0];
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    if !(g0 > f64::EPSILON * f64::EPSILON * (1.0 + mean * mean)) {
        return Err(Error::ZeroVariance);
    }
    // Γ_m = γ_{2m} + γ_{2m+1}, summed while positive
    let mut sum = 0.0;
    let mut m = 0;
    while 2 * m + 1 < gamma.len() {
        let pair = gamma[2 * m] + gamma[2 * m + 1];
        if pair <= 0.0 {
            break;
        }
        sum += pair;
        m += 1;
    }
    Ok((g0, (2.0 * sum - g0).max(0.0)))
}

/// Asymptotic variance `σ_f²` of the sample mean, scaled by `T`.
pub fn asymptotic_variance(series: &[f64]) -> Result<f64> {
    variance_pair(series).map(|(_, s2)| s2)
}

/// `T · Var(f) / σ_f²`. Super-efficient (antithetic) series give ESS above `T`; a
/// vanishing `σ_f²` is capped at `T log₁₀ T`.
pub fn ess(series: &[f64]) -> Result<f64> {
    let (g0, s2) = variance_pair(series)?;
    let t = series.len() as f64;
    let cap = t * t.log10();
    Ok(if s2 > 0.0 { (t * g0 / s2).min(cap) } else { cap })
}
