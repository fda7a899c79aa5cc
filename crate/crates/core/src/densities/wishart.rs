use std::f64::consts::PI;

use super::{check_kernel, check_positive, check_spd_blocks, integer_gram_terms, log_h, Halves};
use crate::error::{shape, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, SpdMatrix};
use crate::special::ln_gamma_unchecked;

/// Generalised Wishart: the joint law of all Gram blocks `W_i = X_i' X_i`,
/// `i = 0..=k`.
pub fn log_wishart(w: &[SpdMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    if w.len() != structure.k() + 1 {
        return shape(format!("expected {} Gram blocks, got {}", structure.k() + 1, w.len()));
    }
    for (i, wi) in w.iter().enumerate() {
        structure.check_order(i, wi)?;
    }
    let traces: f64 = w.iter().map(SpdMatrix::trace).sum();
    let halves = Halves::of(structure);
    Ok(halves.total * PI.ln() + integer_gram_terms(w, 0, structure) + log_h(kernel, traces)?)
}

/// Generalised Gamma - generalised Wishart: the joint law of
/// `(V = ||X_0||², W_1..W_k)`.
pub fn log_gamma_wishart(v: f64, w: &[SpdMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_spd_blocks(w, structure)?;
    let halves = Halves::of(structure);
    let traces: f64 = w.iter().map(SpdMatrix::trace).sum();
    Ok(halves.total * PI.ln() - ln_gamma_unchecked(halves.anchor)
        + (halves.anchor - 1.0) * v.ln()
        + integer_gram_terms(w, 1, structure)
        + log_h(kernel, v + traces)?)
}
