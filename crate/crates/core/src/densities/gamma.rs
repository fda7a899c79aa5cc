use std::f64::consts::PI;

use super::{check_kernel, check_positive, check_rect_blocks, log_h, Halves};
use crate::error::{shape, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix};
use crate::special::ln_gamma_unchecked;

/// Multivariate generalised Gamma: the joint law of `V_i = ||X_i||²`,
/// `i = 0..=k`.
pub fn log_gg(v: &[f64], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    if v.len() != structure.k() + 1 {
        return shape(format!("expected {} squared norms, got {}", structure.k() + 1, v.len()));
    }
    let m = structure.cols() as f64;
    let mut total = structure.dim() as f64 / 2.0 * PI.ln();
    for (i, &vi) in v.iter().enumerate() {
        check_positive("v_i", vi)?;
        let half = structure.rows(i) as f64 * m / 2.0;
        total += (half - 1.0) * vi.ln() - ln_gamma_unchecked(half);
    }
    Ok(total + log_h(kernel, v.iter().sum())?)
}

/// Generalised Gamma - elliptical: the joint law of `V = ||X_0||²` and the
/// untouched blocks `X_1, ..., X_k`.
pub fn log_gamma_elliptical(v: f64, x: &[RealMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_rect_blocks(x, structure)?;
    let halves = Halves::of(structure);
    let norms: f64 = x.iter().map(RealMatrix::frobenius_sq).sum();
    Ok(halves.log_anchor_coeff() + (halves.anchor - 1.0) * v.ln() + log_h(kernel, v + norms)?)
}
