//! Maximum likelihood for the beta type II model of a dependent sample:
//! each replicate is `k` SPD matrices `F_1..F_k` of order `m` sharing one
//! anchor, with a common shape `a` for every block.

pub mod nelder_mead;

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::matcore::SpdMatrix;
use crate::special::{ln_gamma_unchecked, ln_multigamma_unchecked};

/// Per-replicate sufficient statistics of the beta type II likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct Beta2Data {
    m: usize,
    k: usize,
    /// `Σ_i ln|F_i|` per replicate.
    log_dets: Vec<f64>,
    /// `ln(1 + Σ_i tr F_i)` per replicate.
    log_traces: Vec<f64>,
}

impl Beta2Data {
    pub fn new(replicates: &[Vec<SpdMatrix>], m: usize) -> Result<Self> {
        let k = match replicates.first() {
            Some(first) if !first.is_empty() => first.len(),
            Some(_) => return domain("replicates must contain at least one matrix"),
            None => return domain("at least one replicate is required"),
        };
        let mut log_dets = Vec::with_capacity(replicates.len());
        let mut log_traces = Vec::with_capacity(replicates.len());
        for (r, rep) in replicates.iter().enumerate() {
            if rep.len() != k {
                return shape(format!("replicate {r} has {} matrices, expected {k}", rep.len()));
            }
            if let Some(f) = rep.iter().find(|f| f.order() != m) {
                return shape(format!("replicate {r} holds a matrix of order {}, expected {m}", f.order()));
            }
            log_dets.push(rep.iter().map(SpdMatrix::log_det).sum());
            log_traces.push(rep.iter().map(SpdMatrix::trace).sum::<f64>().ln_1p());
        }
        Ok(Self { m, k, log_dets, log_traces })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn replicates(&self) -> usize {
        self.log_dets.len()
    }

    /// Negative log-likelihood at `(a0, a)`.
    pub fn nll(&self, a0: f64, a: f64) -> Result<f64> {
        check_feasible(self.m, a0, a)?;
        Ok(self.nll_unchecked(a0, a))
    }

    fn nll_unchecked(&self, a0: f64, a: f64) -> f64 {
        let (m, k) = (self.m as f64, self.k as f64);
        let total = (a0 + k * a) * m;
        let coeff = ln_gamma_unchecked(total) - ln_gamma_unchecked(a0 * m) - k * ln_multigamma_unchecked(self.m, a);
        let det_exp = a - (m + 1.0) / 2.0;
        let mut sum = 0.0;
        for (ld, lt) in self.log_dets.iter().zip(&self.log_traces) {
            sum += coeff + det_exp * ld - total * lt;
        }
        -sum
    }
}

fn check_feasible(m: usize, a0: f64, a: f64) -> Result<()> {
    let bound = (m as f64 - 1.0) / 2.0;
    if !(a0 > 0.0 && a0.is_finite()) {
        return domain(format!("a0 must be positive, got {a0}"));
    }
    if !(a > bound && a.is_finite()) {
        return domain(format!("a must exceed (m - 1)/2 = {bound}, got {a}"));
    }
    Ok(())
}

/// Negative log-likelihood of `replicates` at `(a0, a)`.
pub fn nll_beta2(replicates: &[Vec<SpdMatrix>], m: usize, a0: f64, a: f64) -> Result<f64> {
    Beta2Data::new(replicates, m)?.nll(a0, a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub init_a0: f64,
    pub init_a: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_max_iterations() -> usize {
    2000
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_restarts() -> usize {
    3
}

impl FitConfig {
    pub fn new(init_a0: f64, init_a: f64) -> Self {
        Self {
            init_a0,
            init_a,
            max_iterations: default_max_iterations(),
            tolerance: default_tolerance(),
            restarts: default_restarts(),
        }
    }

    /// Starts at `a0 = 1`, `a = (m + 1)/2`.
    pub fn default_for(m: usize) -> Self {
        Self::new(1.0, (m as f64 + 1.0) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub a0_hat: f64,
    pub a_hat: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub optimizer_trace: Vec<(usize, f64)>,
    pub standard_errors: Option<(f64, f64)>,
}

/// Offsets in the unconstrained coordinates for the restarts.
const RESTART_OFFSETS: [(f64, f64); 4] = [(0.5, 0.5), (-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5)];

/// Maximum likelihood estimates of `(a0, a)`, searched over
/// `θ = (ln a0, ln(a - (m-1)/2))`.
pub fn fit_beta2(replicates: &[Vec<SpdMatrix>], m: usize, config: &FitConfig) -> Result<FitReport> {
    let data = Beta2Data::new(replicates, m)?;
    fit(&data, config)
}

/// [`fit_beta2`] over precomputed statistics.
pub fn fit(data: &Beta2Data, config: &FitConfig) -> Result<FitReport> {
    check_feasible(data.m, config.init_a0, config.init_a)?;
    if !(config.tolerance > 0.0) || config.max_iterations == 0 {
        return domain("tolerance and max_iterations must be positive");
    }
    let bound = (data.m as f64 - 1.0) / 2.0;
    let to_params = |theta: &[f64]| (theta[0].exp(), bound + theta[1].exp());
    let objective = |theta: &[f64]| {
        let (a0, a) = to_params(theta);
        if a0 > 0.0 && a > bound && a0.is_finite() && a.is_finite() {
            data.nll_unchecked(a0, a)
        } else {
            f64::NAN
        }
    };
    let theta0 = [config.init_a0.ln(), (config.init_a - bound).ln()];
    let options =
        nelder_mead::Options { step: 0.1, tolerance: config.tolerance, max_iterations: config.max_iterations };

    let mut best: Option<nelder_mead::Minimum> = None;
    for start in 0..=config.restarts {
        let x0 = if start == 0 {
            theta0.to_vec()
        } else {
            let (d0, d1) = RESTART_OFFSETS[(start - 1) % RESTART_OFFSETS.len()];
            let scale = (1 + (start - 1) / RESTART_OFFSETS.len()) as f64;
            vec![theta0[0] + scale * d0, theta0[1] + scale * d1]
        };
        let run = nelder_mead::minimize(objective, &x0, options);
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start runs");
    let (a0_hat, a_hat) = to_params(&best.x);
    // a stencil reaching past the boundary leaves the errors undefined
    let standard_errors = hessian_se(|a0, a| data.nll(a0, a), (a0_hat, a_hat)).ok().flatten();
    Ok(FitReport {
        a0_hat,
        a_hat,
        log_likelihood: -best.value,
        converged: best.converged && best.value.is_finite(),
        iterations: best.iterations,
        optimizer_trace: best.trace,
        standard_errors,
    })
}

/// Standard errors of `(a0, a)` from the inverse central-difference Hessian
/// of the negative log-likelihood. `None` when the Hessian is not positive
/// definite.
pub fn numerical_hessian_se(replicates: &[Vec<SpdMatrix>], m: usize, at: (f64, f64)) -> Result<Option<(f64, f64)>> {
    let data = Beta2Data::new(replicates, m)?;
    check_feasible(m, at.0, at.1)?;
    hessian_se(|a0, a| data.nll(a0, a), at)
}

/// Central-difference Hessian of `f` at `at` with relative step `1e-4`,
/// inverted for standard errors.
pub fn hessian_se<F: Fn(f64, f64) -> Result<f64>>(f: F, at: (f64, f64)) -> Result<Option<(f64, f64)>> {
    let h = [1e-4 * at.0.abs().max(1e-8), 1e-4 * at.1.abs().max(1e-8)];
    let x = [at.0, at.1];
    let eval = |d0: f64, d1: f64| f(x[0] + d0 * h[0], x[1] + d1 * h[1]);
    let f0 = eval(0.0, 0.0)?;
    let h00 = (eval(1.0, 0.0)? - 2.0 * f0 + eval(-1.0, 0.0)?) / (h[0] * h[0]);
    let h11 = (eval(0.0, 1.0)? - 2.0 * f0 + eval(0.0, -1.0)?) / (h[1] * h[1]);
    let h01 = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?) / (4.0 * h[0] * h[1]);
    let det = h00 * h11 - h01 * h01;
    if !(h00 > 0.0 && det > 0.0) {
        return Ok(None);
    }
    Ok(Some(((h11 / det).sqrt(), (h00 / det).sqrt())))
}
