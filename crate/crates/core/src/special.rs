//! Log-space special functions: `ln Γ`, the multivariate gamma `ln Γ_m` and
//! the volume of the Stiefel manifold.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Lanczos approximation, g = 671/128, 14 terms.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_23e-5,
];

/// `ln Γ(a)` for `a > 0`.
pub fn log_gamma(a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("log_gamma requires a finite a > 0, got {a}"));
    }
    Ok(ln_gamma_unchecked(a))
}

pub(crate) fn ln_gamma_unchecked(a: f64) -> f64 {
    // exact at the integers where ln Γ vanishes
    if a == 1.0 || a == 2.0 {
        return 0.0;
    }
    // Γ(a) = Γ(a + 1) / a keeps the series well inside its accurate range
    if a < 0.5 {
        return ln_gamma_unchecked(a + 1.0) - a.ln();
    }
    let mut denom = a;
    let mut series = LANCZOS_C0;
    for c in LANCZOS {
        denom += 1.0;
        series += c / denom;
    }
    let t = a + LANCZOS_G;
    (a + 0.5) * t.ln() - t + LN_SQRT_2PI + (series / a).ln()
}

/// `ln Γ_m[a] = m(m-1)/4 ln π + Σ_{i=1}^m ln Γ(a - (i-1)/2)`, for `a > (m-1)/2`.
pub fn log_multigamma(m: usize, a: f64) -> Result<f64> {
    if m == 0 {
        return domain("multivariate gamma requires m >= 1");
    }
    let bound = (m as f64 - 1.0) / 2.0;
    if !(a > bound) || !a.is_finite() {
        return domain(format!("log_multigamma(m = {m}) requires a > {bound}, got {a}"));
    }
    Ok(ln_multigamma_unchecked(m, a))
}

pub(crate) fn ln_multigamma_unchecked(m: usize, a: f64) -> f64 {
    let mf = m as f64;
    let mut total = mf * (mf - 1.0) / 4.0 * PI.ln();
    for i in 0..m {
        total += ln_gamma_unchecked(a - i as f64 / 2.0);
    }
    total
}

/// Log volume of the Stiefel manifold of `n x m` matrices with orthonormal
/// columns: `ln(2^m π^{mn/2} / Γ_m[n/2])`.
pub fn log_stiefel_volume(n: usize, m: usize) -> Result<f64> {
    if m == 0 || n < m {
        return domain(format!("Stiefel manifold needs n >= m >= 1, got n = {n}, m = {m}"));
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(mf * std::f64::consts::LN_2 + mf * nf / 2.0 * PI.ln() - ln_multigamma_unchecked(m, nf / 2.0))
}
