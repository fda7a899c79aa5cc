use super::{ball_norm, check_kernel, check_positive, check_rect_blocks, log_h, Halves, ShapeParams};
use crate::error::{domain, shape, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};

/// Multimatrix Pearson type VII: the law of `T_i = V^{-1/2} X_i`.
pub fn log_pearson7_marginal(t: &[RealMatrix], structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_rect_blocks(t, structure)?;
    params.check(structure)?;
    let m = params.m() as f64;
    let norms: f64 = t.iter().map(RealMatrix::frobenius_sq).sum();
    Ok(params.log_pearson_coeff() - params.total() * m * norms.ln_1p())
}

/// Generalised Gamma - Pearson type VII: the joint law of `(V, T_1..T_k)`.
pub fn log_pearson7_joint(v: f64, t: &[RealMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_rect_blocks(t, structure)?;
    let halves = Halves::of(structure);
    let norms: f64 = t.iter().map(RealMatrix::frobenius_sq).sum();
    Ok(halves.log_anchor_coeff() + (halves.total - 1.0) * v.ln() + log_h(kernel, v * (1.0 + norms))?)
}

/// `(Σ s_i / (1 - s_i), Σ c_i ln(1 - s_i))` for Pearson II blocks, where
/// `c_i` is supplied per block.
fn pearson2_terms(r: &[RealMatrix], exponent: impl Fn(usize) -> f64) -> Result<(f64, f64)> {
    let mut odds = 0.0;
    let mut log_factor = 0.0;
    for (i, ri) in r.iter().enumerate() {
        let s = ball_norm(i, ri)?;
        odds += s / (1.0 - s);
        log_factor += exponent(i) * (-s).ln_1p();
    }
    Ok((odds, log_factor))
}

/// Multimatrix Pearson type II: the law of `R_i = (V + ||X_i||²)^{-1/2} X_i`.
pub fn log_pearson2_marginal(r: &[RealMatrix], structure: &BlockStructure, params: &ShapeParams) -> Result<f64> {
    check_rect_blocks(r, structure)?;
    params.check(structure)?;
    let m = params.m() as f64;
    let (odds, log_factor) = pearson2_terms(r, |i| -params.a()[i] * m - 1.0)?;
    Ok(params.log_pearson_coeff() - params.total() * m * odds.ln_1p() + log_factor)
}

/// Generalised Gamma - Pearson type II: the joint law of `(V, R_1..R_k)`.
pub fn log_pearson2_joint(v: f64, r: &[RealMatrix], structure: &BlockStructure, kernel: &KernelSpec) -> Result<f64> {
    check_kernel(kernel, structure)?;
    check_positive("v", v)?;
    check_rect_blocks(r, structure)?;
    let halves = Halves::of(structure);
    let m = structure.cols() as f64;
    let (odds, log_factor) = pearson2_terms(r, |i| -(structure.rows(i + 1) as f64) * m / 2.0 - 1.0)?;
    Ok(halves.log_anchor_coeff() + (halves.total - 1.0) * v.ln() + log_h(kernel, v * (1.0 + odds))? + log_factor)
}

/// Location and scale of one block of the robust Pearson VII form:
/// `S_i = μ_i + √r_i A_i T_i B_i` with `Σ_i = A_i A_i'`, `Θ_i = B_i' B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationScale {
    pub mu: RealMatrix,
    pub sigma: SpdMatrix,
    pub theta: SpdMatrix,
    pub r: f64,
}

impl LocationScale {
    pub fn new(mu: RealMatrix, sigma: SpdMatrix, theta: SpdMatrix, r: f64) -> Result<Self> {
        if sigma.order() != mu.rows() || theta.order() != mu.cols() {
            return shape(format!(
                "location is {}x{} but Σ has order {} and Θ order {}",
                mu.rows(),
                mu.cols(),
                sigma.order(),
                theta.order()
            ));
        }
        if !(r > 0.0) || !r.is_finite() {
            return domain(format!("scale r must be positive, got {r}"));
        }
        Ok(Self { mu, sigma, theta, r })
    }

    /// Zero location, identity scales, `r = 1`.
    pub fn standard(rows: usize, cols: usize) -> Self {
        Self {
            mu: RealMatrix::zeros(rows, cols),
            sigma: SpdMatrix::identity(rows),
            theta: SpdMatrix::identity(cols),
            r: 1.0,
        }
    }

    /// `tr((S - μ)' Σ^{-1} (S - μ) Θ^{-1}) / r`.
    fn scaled_quadratic(&self, s: &RealMatrix) -> f64 {
        let d = s.as_dmatrix() - self.mu.as_dmatrix();
        let inner = d.transpose() * self.sigma.solve(&d);
        self.theta.solve_trace(&inner) / self.r
    }

    /// `ln` of the Jacobian `r^{-nm/2} |Σ|^{-m/2} |Θ|^{-n/2}`.
    fn log_jacobian(&self) -> f64 {
        let (n, m) = (self.mu.rows() as f64, self.mu.cols() as f64);
        -(n * m / 2.0 * self.r.ln() + m / 2.0 * self.sigma.log_det() + n / 2.0 * self.theta.log_det())
    }
}

/// Pearson type VII in location-scale form, from `T_i = A_i^{-1}(S_i - μ_i)B_i^{-1}/√r_i`.
pub fn log_located_p7(
    s: &[RealMatrix],
    structure: &BlockStructure,
    params: &ShapeParams,
    scales: &[LocationScale],
) -> Result<f64> {
    check_rect_blocks(s, structure)?;
    params.check(structure)?;
    if scales.len() != s.len() {
        return shape(format!("expected {} location-scale blocks, got {}", s.len(), scales.len()));
    }
    let m = params.m() as f64;
    let mut quadratic = 0.0;
    let mut log_jac = 0.0;
    for (i, (si, ls)) in s.iter().zip(scales).enumerate() {
        if ls.mu.rows() != si.rows() || ls.mu.cols() != si.cols() {
            return shape(format!("location of block {} does not match its shape", i + 1));
        }
        quadratic += ls.scaled_quadratic(si);
        log_jac += ls.log_jacobian();
    }
    Ok(params.log_pearson_coeff() + log_jac - params.total() * m * quadratic.ln_1p())
}
