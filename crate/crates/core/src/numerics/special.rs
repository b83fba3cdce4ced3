//! Special functions: log-gamma, digamma, the normal CDF and the Student-t log-density.

use crate::error::{Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128, n = 15.
const LANCZOS_COEF: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_7e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln Γ(x)` for `x > 0` via the Lanczos approximation.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!(
            "ln_gamma requires finite x > 0, got {x}"
        )));
    }
    // Exact values at the two zeros of ln Γ keep the low-order terms clean.
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    let z = x - 1.0;
    let mut series = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// Digamma function `ψ(x) = d/dx ln Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    acc + x.ln() - 0.5 * inv - series
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal log-density.
#[inline]
pub fn normal_logpdf(x: f64) -> f64 {
    -0.5 * x * x - HALF_LN_2PI
}

/// Log normalizing constant of the Student-t density with `delta` degrees of freedom.
pub(crate) fn student_t_log_norm(delta: f64) -> f64 {
    ln_gamma_unchecked(0.5 * (delta + 1.0))
        - ln_gamma_unchecked(0.5 * delta)
        - 0.5 * (delta * PI).ln()
}

/// Log-density of the standard Student-t distribution (mode 0, variance `δ/(δ−2)`).
pub fn student_t_logpdf(x: f64, delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 2.0 {
        return Err(Error::domain(format!(
            "Student-t degrees of freedom must exceed 2, got {delta}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "Student-t argument must be finite, got {x}"
        )));
    }
    Ok(student_t_log_norm(delta) - 0.5 * (delta + 1.0) * (x * x / delta).ln_1p())
}
