//! Spherical density generators `h(u)`.
//!
//! A kernel is always bound to the total dimension `d = N m` it normalizes
//! over: the same functional form needs a different constant for every `d`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::Quadrature;
use crate::special::ln_gamma_unchecked;

/// Functional form of the generator, as written in configuration files:
/// `{"family":"normal"}` or `{"family":"pearson7","q":..,"r":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum KernelFamily {
    #[serde(rename = "normal")]
    Normal,
    /// `h(u) ∝ (1 + u / r)^{-q}`.
    #[serde(rename = "pearson7")]
    PearsonVII { q: f64, r: f64 },
}

/// A density generator bound to its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
    log_norm: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return domain("kernel dimension must be positive");
        }
        let half_d = dim as f64 / 2.0;
        let log_norm = match family {
            KernelFamily::Normal => -half_d * (2.0 * PI).ln(),
            KernelFamily::PearsonVII { q, r } => {
                if !(r > 0.0) || !r.is_finite() {
                    return domain(format!("Pearson VII scale r must be positive, got {r}"));
                }
                if !(q > half_d) || !q.is_finite() {
                    return domain(format!("Pearson VII shape q must exceed d/2 = {half_d}, got {q}"));
                }
                ln_gamma_unchecked(q) - half_d * (PI * r).ln() - ln_gamma_unchecked(q - half_d)
            }
        };
        Ok(Self { family, dim, log_norm })
    }

    pub fn normal(dim: usize) -> Self {
        Self::new(KernelFamily::Normal, dim).expect("normal kernel is valid for dim >= 1")
    }

    pub fn pearson7(dim: usize, q: f64, r: f64) -> Result<Self> {
        Self::new(KernelFamily::PearsonVII { q, r }, dim)
    }

    /// Multivariate t kernel with `nu` degrees of freedom and unit scale.
    pub fn student_t(dim: usize, nu: f64) -> Result<Self> {
        Self::pearson7(dim, (dim as f64 + nu) / 2.0, nu)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The same functional form rebound to another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.family, dim)
    }

    /// `ln h(u)`.
    pub fn log_h(&self, u: f64) -> Result<f64> {
        if u < 0.0 || u.is_nan() {
            return Err(Error::NegativeArgument(u));
        }
        Ok(self.log_h_unchecked(u))
    }

    pub(crate) fn log_h_unchecked(&self, u: f64) -> f64 {
        match self.family {
            KernelFamily::Normal => self.log_norm - 0.5 * u,
            KernelFamily::PearsonVII { q, r } => self.log_norm - q * (u / r).ln_1p(),
        }
    }

    /// Quadrature of `∫_0^∞ v^{d/2-1} h(a v) dv`; analytically
    /// `a^{-d/2} Γ(d/2) / π^{d/2}`.
    pub fn radial_integral(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) || !a.is_finite() {
            return domain(format!("radial integral scale must be positive, got {a}"));
        }
        let p = self.dim as f64 / 2.0 - 1.0;
        Quadrature { rel_tol: 1e-8, abs_tol: 0.0, max_intervals: 8000 }.integrate_to_infinity(
            |v| {
                if v <= 0.0 {
                    return 0.0;
                }
                (p * v.ln() + self.log_h_unchecked(a * v)).exp()
            },
            0.0,
        )
    }

    /// Draws `||X||²` for `X` spherical in `R^d` with this generator.
    ///
    /// Normal: `χ²_d`. Pearson VII: `χ²_d · r / χ²_ν` with `ν = 2q - d`.
    pub fn sample_radius_sq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let d = self.dim as f64;
        let chi_d = ChiSquared::new(d).expect("dimension is positive");
        match self.family {
            KernelFamily::Normal => chi_d.sample(rng),
            KernelFamily::PearsonVII { q, r } => {
                let nu = 2.0 * q - d;
                let chi_nu = ChiSquared::new(nu).expect("q > d/2 checked at construction");
                chi_d.sample(rng) * r / chi_nu.sample(rng)
            }
        }
    }
}
