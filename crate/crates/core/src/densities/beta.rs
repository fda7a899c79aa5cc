use std::f64::consts::PI;

use super::{
    check_kernel, check_positive, check_spd_blocks, integer_gram_terms, log_h, unit_trace, Halves, ShapeParams,
};
use crate::error::Result;
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, SpdMatrix};
use crate::special::ln_gamma_unchecked;

fn real_det_terms(blocks: &[SpdMatrix], params: &ShapeParams) -> f64 {
    blocks.iter().enumerate().map(|(i, b)| params.det_exponent(i) * b.log_det()).sum()
}

/// `(Σ τ_i / (1 - τ_i), Σ c_i ln(1 - τ_i))` with `τ_i = tr B_i`.
fn beta1_terms(b: &[SpdMatrix], exponent: impl Fn(usize) -> f64) -> Result<(f64, f64)> {
    let mut odds = 0.0;
    let mut log_factor = 0.0;
    for (i, bi) in b.iter().enumerate() {
        let tau = unit_trace(i, bi)?;
        odds += tau / (1.0 - tau);
        log_factor += exponent(i) * (-tau).ln_1p();
    }
    Ok((odds, log_factor))
}

/// Multimatrix beta type II: the law of `F_i = T_i' T_i`.
pub fn log_beta2_marginal(f: &[SpdMatrix], structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_spd_blocks(f, structure)?;
    params.check(structure)?;
    let m = params.m() as f64;
    let traces: f64 = f.iter().map(SpdMatrix::trace).sum();
    Ok(params.log_beta_coeff() + real_det_terms(f, params) - params.total() * m * traces.ln_1p())
}

/// Generalised Gamma - beta type II: the joint law of `(V, F_1..F_k)`.
pub fn log_beta2_joint(v: f64, f: &[SpdMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_spd_blocks(f, structure)?;
    let halves = Halves::of(structure);
    let traces: f64 = f.iter().map(SpdMatrix::trace).sum();
    Ok(halves.total * PI.ln() - ln_gamma_unchecked(halves.anchor)
        + (halves.total - 1.0) * v.ln()
        + integer_gram_terms(f, 1, structure)
        + log_h(kernel, v * (1.0 + traces))?)
}

/// Multimatrix beta type I: the law of `B_i = R_i' R_i`.
pub fn log_beta1_marginal(b: &[SpdMatrix], structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_spd_blocks(b, structure)?;
    params.check(structure)?;
    let m = params.m() as f64;
    let (odds, log_factor) = beta1_terms(b, |i| -params.a()[i] * m - 1.0)?;
    Ok(params.log_beta_coeff() + real_det_terms(b, params) - params.total() * m * odds.ln_1p() + log_factor)
}

/// Generalised Gamma - beta type I: the joint law of `(V, B_1..B_k)`.
pub fn log_beta1_joint(v: f64, b: &[SpdMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_spd_blocks(b, structure)?;
    let halves = Halves::of(structure);
    let m = structure.cols() as f64;
    let (odds, log_factor) = beta1_terms(b, |i| -(structure.rows(i + 1) as f64) * m / 2.0 - 1.0)?;
    Ok(halves.total * PI.ln() - ln_gamma_unchecked(halves.anchor)
        + (halves.total - 1.0) * v.ln()
        + integer_gram_terms(b, 1, structure)
        + log_h(kernel, v * (1.0 + odds))?
        + log_factor)
}
