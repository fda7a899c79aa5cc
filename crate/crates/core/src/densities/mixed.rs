//! Two-block families where block 1 is scaled by `V` and block 2 by
//! `V_0 = V + ||X_2||²`.
//!
//! The joint forms take `v0 = V_0` as their scalar; `T` and `R` are the
//! usual `V^{-1/2} X_1` and `V_0^{-1/2} X_2`.

use std::f64::consts::PI;

use super::{ball_norm, check_kernel, check_positive, integer_gram_terms, log_h, unit_trace, Halves, ShapeParams};
use crate::error::{shape, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};
use crate::special::{ln_gamma_unchecked, ln_multigamma_unchecked};

fn check_pair(structure: &BlockStructure) -> Result<()> {
    if structure.k() != 2 {
        return shape(format!("two-block families need k = 2, got k = {}", structure.k()));
    }
    Ok(())
}

/// `(n_0 + n_1) m / 2 - 1`, the exponent of `1 - ||R||²`.
fn integer_boundary_exponent(structure: &BlockStructure) -> f64 {
    (structure.rows(0) + structure.rows(1)) as f64 * structure.cols() as f64 / 2.0 - 1.0
}

fn real_boundary_exponent(params: &ShapeParams) -> f64 {
    (params.a0() + params.a()[0]) * params.m() as f64 - 1.0
}

/// Joint law of `(V_0, T, R)`.
pub fn log_tri_p7_p2(
    v0: f64,
    t: &RealMatrix,
    r: &RealMatrix,
    structure: &BlockStructure,
    kernel: &KernelSpec,
) -> Result<f64> {
    check_pair(structure)?;
    check_kernel(kernel, structure)?;
    check_positive("v0", v0)?;
    structure.check_block(1, t)?;
    structure.check_block(2, r)?;
    let s = ball_norm(1, r)?;
    let halves = Halves::of(structure);
    let arg = v0 * (1.0 + (1.0 - s) * t.frobenius_sq());
    Ok(halves.log_anchor_coeff()
        + (halves.total - 1.0) * v0.ln()
        + log_h(kernel, arg)?
        + integer_boundary_exponent(structure) * (-s).ln_1p())
}

/// Bimatrix Pearson VII - Pearson II: the law of `(T, R)`.
pub fn log_bi_p7_p2(t: &RealMatrix, r: &RealMatrix, structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_pair(structure)?;
    params.check(structure)?;
    structure.check_block(1, t)?;
    structure.check_block(2, r)?;
    let s = ball_norm(1, r)?;
    let m = params.m() as f64;
    Ok(params.log_pearson_coeff() - params.total() * m * ((1.0 - s) * t.frobenius_sq()).ln_1p()
        + real_boundary_exponent(params) * (-s).ln_1p())
}

/// Joint law of `(V_0, F, B)` with `F = T'T`, `B = R'R`.
pub fn log_tri_b2_b1(
    v0: f64,
    f: &SpdMatrix,
    b: &SpdMatrix,
    structure: &BlockStructure,
    kernel: &KernelSpec,
) -> Result<f64> {
    check_pair(structure)?;
    check_kernel(kernel, structure)?;
    check_positive("v0", v0)?;
    structure.check_order(1, f)?;
    structure.check_order(2, b)?;
    let tau = unit_trace(1, b)?;
    let halves = Halves::of(structure);
    let gram = integer_gram_terms(std::slice::from_ref(f), 1, structure)
        + integer_gram_terms(std::slice::from_ref(b), 2, structure);
    Ok(halves.total * PI.ln() - ln_gamma_unchecked(halves.anchor)
        + (halves.total - 1.0) * v0.ln()
        + gram
        + log_h(kernel, v0 * (1.0 + (1.0 - tau) * f.trace()))?
        + integer_boundary_exponent(structure) * (-tau).ln_1p())
}

/// Bimatrix beta II - beta I: the law of `(F, B)`.
pub fn log_bi_b2_b1(f: &SpdMatrix, b: &SpdMatrix, structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_pair(structure)?;
    params.check(structure)?;
    structure.check_order(1, f)?;
    structure.check_order(2, b)?;
    let tau = unit_trace(1, b)?;
    let m = params.m();
    let a = params.a();
    let coeff = params.log_gamma_ratio() - ln_multigamma_unchecked(m, a[0]) - ln_multigamma_unchecked(m, a[1]);
    Ok(coeff + params.det_exponent(0) * f.log_det() + params.det_exponent(1) * b.log_det()
        - params.total() * m as f64 * ((1.0 - tau) * f.trace()).ln_1p()
        + real_boundary_exponent(params) * (-tau).ln_1p())
}

/// `-(m + 1)(ln|A| + ln|U|)`, the Jacobian of `(F, B) → (A, U) = (F^{-1}, B^{-1})`.
fn log_inverse_jacobian(a: &SpdMatrix, u: &SpdMatrix) -> f64 {
    -(a.order() as f64 + 1.0) * (a.log_det() + u.log_det())
}

/// Inverse bimatrix beta II - beta I: the law of `(A, U) = (F^{-1}, B^{-1})`.
pub fn log_inv_b2_b1_marginal(
    a: &SpdMatrix,
    u: &SpdMatrix,
    structure: &BlockStructure,
    params: &ShapeParams,
) -> Result<f64> {
    check_pair(structure)?;
    structure.check_order(1, a)?;
    structure.check_order(2, u)?;
    Ok(log_bi_b2_b1(&a.inverse()?, &u.inverse()?, structure, params)? + log_inverse_jacobian(a, u))
}

/// Joint law of `(W, A, U) = (1/V_0, F^{-1}, B^{-1})`.
pub fn log_inv_b2_b1_joint(
    w: f64,
    a: &SpdMatrix,
    u: &SpdMatrix,
    structure: &BlockStructure,
    kernel: &KernelSpec,
) -> Result<f64> {
    check_pair(structure)?;
    check_positive("w", w)?;
    structure.check_order(1, a)?;
    structure.check_order(2, u)?;
    Ok(log_tri_b2_b1(1.0 / w, &a.inverse()?, &u.inverse()?, structure, kernel)? - 2.0 * w.ln()
        + log_inverse_jacobian(a, u))
}
