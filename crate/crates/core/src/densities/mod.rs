//! Log-density evaluators for the multimatrix families.
//!
//! Joint forms (with the scalar `v`) are indexed by a kernel and use the
//! integer block structure. Marginal forms take no kernel: they are the same
//! for every spherical law. They are parameterized by [`ShapeParams`], the
//! real extension of the half-dimensions, with the integer case recovered by
//! [`ShapeParams::from_structure`].
//!
//! Every evaluator works on the open support and returns a [`Error::Domain`]
//! for points on or outside its boundary.

mod beta;
mod family;
mod gamma;
mod mixed;
mod pearson;
mod wishart;

pub use beta::{log_beta1_joint, log_beta1_marginal, log_beta2_joint, log_beta2_marginal};
pub use family::{Family, Form, FormKind};
pub use gamma::{log_gamma_elliptical, log_gg};
pub use mixed::{
    log_bi_b2_b1, log_bi_p7_p2, log_inv_b2_b1_joint, log_inv_b2_b1_marginal, log_tri_b2_b1, log_tri_p7_p2,
};
pub use pearson::{
    log_located_p7, log_pearson2_joint, log_pearson2_marginal, log_pearson7_joint, log_pearson7_marginal, LocationScale,
};
pub use wishart::{log_gamma_wishart, log_wishart};

use std::f64::consts::PI;

use crate::error::{domain, shape, Error, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};
use crate::special::{ln_gamma_unchecked, ln_multigamma_unchecked};

/// Real shape parameters: `a0 m` stands in for `n_0 m / 2` and `a_i` for
/// `n_i / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeParams {
    a0: f64,
    a: Vec<f64>,
    m: usize,
}

impl ShapeParams {
    /// Requires `a0 > 0` and `a_i > (m - 1) / 2`.
    pub fn new(a0: f64, a: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 {
            return domain("m must be at least 1");
        }
        if !(a0 > 0.0) || !a0.is_finite() {
            return domain(format!("a0 must be positive, got {a0}"));
        }
        let bound = (m as f64 - 1.0) / 2.0;
        if let Some((i, ai)) = a.iter().enumerate().find(|(_, &ai)| !(ai > bound) || !ai.is_finite()) {
            return domain(format!("a[{i}] = {ai} must exceed (m - 1)/2 = {bound}"));
        }
        Ok(Self { a0, a, m })
    }

    /// Common shape `a` for all `k` blocks.
    pub fn common(a0: f64, a: f64, k: usize, m: usize) -> Result<Self> {
        Self::new(a0, vec![a; k], m)
    }

    /// The integer case `a0 = n_0 / 2`, `a_i = n_i / 2`.
    pub fn from_structure(structure: &BlockStructure) -> Self {
        let half = |n: usize| n as f64 / 2.0;
        Self {
            a0: half(structure.rows(0)),
            a: structure.block_rows()[1..].iter().map(|&n| half(n)).collect(),
            m: structure.cols(),
        }
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// `A = a0 + Σ a_i`.
    pub fn total(&self) -> f64 {
        self.a0 + self.a.iter().sum::<f64>()
    }

    fn check(&self, structure: &BlockStructure) -> Result<()> {
        if self.k() != structure.k() || self.m != structure.cols() {
            return shape(format!(
                "shape parameters are for k = {}, m = {} but the structure has k = {}, m = {}",
                self.k(),
                self.m,
                structure.k(),
                structure.cols()
            ));
        }
        Ok(())
    }

    /// `ln Γ(A m) - ln Γ(a0 m)`, shared by every marginal coefficient.
    fn log_gamma_ratio(&self) -> f64 {
        let m = self.m as f64;
        ln_gamma_unchecked(self.total() * m) - ln_gamma_unchecked(self.a0 * m)
    }

    /// Coefficient of the Pearson-type marginals over rectangular blocks.
    fn log_pearson_coeff(&self) -> f64 {
        let m = self.m as f64;
        self.log_gamma_ratio() - (self.total() - self.a0) * m * PI.ln()
    }

    /// Coefficient of the beta-type marginals over SPD blocks.
    fn log_beta_coeff(&self) -> f64 {
        self.log_gamma_ratio() - self.a.iter().map(|&ai| ln_multigamma_unchecked(self.m, ai)).sum::<f64>()
    }

    fn det_exponent(&self, i: usize) -> f64 {
        self.a[i] - (self.m as f64 + 1.0) / 2.0
    }
}

/// Half-dimension helpers for the integer (joint) forms.
struct Halves {
    /// `n_0 m / 2`
    anchor: f64,
    /// `N m / 2`
    total: f64,
}

impl Halves {
    fn of(structure: &BlockStructure) -> Self {
        let m = structure.cols() as f64;
        Self { anchor: structure.rows(0) as f64 * m / 2.0, total: structure.dim() as f64 / 2.0 }
    }

    /// `ln(π^{n_0 m/2} / Γ(n_0 m/2))`
    fn log_anchor_coeff(&self) -> f64 {
        self.anchor * PI.ln() - ln_gamma_unchecked(self.anchor)
    }
}

fn check_kernel(kernel: &KernelSpec, structure: &BlockStructure) -> Result<()> {
    if kernel.dim() != structure.dim() {
        return shape(format!(
            "kernel is bound to dimension {} but the structure has N m = {}",
            kernel.dim(),
            structure.dim()
        ));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

/// Blocks `1..=k` as rectangular matrices.
fn check_rect_blocks(blocks: &[RealMatrix], structure: &BlockStructure) -> Result<()> {
    if blocks.len() != structure.k() {
        return shape(format!("expected {} blocks, got {}", structure.k(), blocks.len()));
    }
    for (i, b) in blocks.iter().enumerate() {
        structure.check_block(i + 1, b)?;
    }
    Ok(())
}

/// Blocks `1..=k` as SPD matrices of order `m`.
fn check_spd_blocks(blocks: &[SpdMatrix], structure: &BlockStructure) -> Result<()> {
    if blocks.len() != structure.k() {
        return shape(format!("expected {} blocks, got {}", structure.k(), blocks.len()));
    }
    for (i, b) in blocks.iter().enumerate() {
        structure.check_order(i + 1, b)?;
    }
    Ok(())
}

/// `Σ [(n_i - m - 1)/2 ln|W_i| - ln Γ_m(n_i/2)]` for Gram blocks numbered
/// from `first`.
fn integer_gram_terms(blocks: &[SpdMatrix], first: usize, structure: &BlockStructure) -> f64 {
    let m = structure.cols();
    blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let n = structure.rows(first + i) as f64;
            (n - m as f64 - 1.0) / 2.0 * b.log_det() - ln_multigamma_unchecked(m, n / 2.0)
        })
        .sum()
}

/// `||R||²` of a Pearson II argument, required inside the unit ball.
fn ball_norm(i: usize, r: &RealMatrix) -> Result<f64> {
    let s = r.frobenius_sq();
    if !(s < 1.0) {
        return domain(format!("block {} has ||R||² = {s}, outside the open unit ball", i + 1));
    }
    Ok(s)
}

/// `tr B` of a beta type I argument, required below one.
fn unit_trace(i: usize, b: &SpdMatrix) -> Result<f64> {
    let t = b.trace();
    if !(t < 1.0) {
        return domain(format!("block {} has tr B = {t}, outside the open support tr B < 1", i + 1));
    }
    Ok(t)
}

fn log_h(kernel: &KernelSpec, u: f64) -> Result<f64> {
    kernel.log_h(u).map_err(|e| match e {
        Error::NegativeArgument(u) => Error::Domain(format!("kernel argument {u} is negative")),
        other => other,
    })
}
