//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals,
//! with the half-line and the real line mapped onto finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Adaptive integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-8, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Panel { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

impl Quadrature {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    /// Integrates over `[a, b]`, returning the estimate even when the
    /// tolerance was not met (`converged == false`).
    pub fn estimate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Estimate {
        const INITIAL_PANELS: usize = 4;
        let width = (b - a) / INITIAL_PANELS as f64;
        let mut panels: Vec<Panel> = (0..INITIAL_PANELS)
            .map(|i| {
                let lo = a + width * i as f64;
                let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
                gauss_kronrod(&mut f, lo, hi)
            })
            .collect();
        let mut evaluations = 15 * INITIAL_PANELS;
        loop {
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let error: f64 = panels.iter().map(|p| p.error).sum();
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target || !error.is_finite() || panels.len() >= self.max_intervals {
                return Estimate { value, error, evaluations, converged: error <= target };
            }
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i)
                .expect("at least one panel");
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) {
                // interval exhausted at machine precision
                return Estimate { value, error, evaluations, converged: false };
            }
            panels.push(gauss_kronrod(&mut f, p.a, mid));
            panels.push(gauss_kronrod(&mut f, mid, p.b));
            evaluations += 30;
        }
    }

    /// `∫_a^b f`; fails when the tolerance is not met.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        checked(self.estimate(f, a, b))
    }

    /// `∫_a^∞ f(x) dx` through `x = a + t / (1 - t)`.
    pub fn estimate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Estimate {
        self.estimate(
            |t| {
                let s = 1.0 - t;
                let out = f(a + t / s);
                if out == 0.0 {
                    0.0
                } else {
                    out / (s * s)
                }
            },
            0.0,
            1.0,
        )
    }

    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, f: F, a: f64) -> Result<f64> {
        checked(self.estimate_to_infinity(f, a))
    }

    /// `∫_{-∞}^{∞} f(x) dx` through `x = t / (1 - t²)`.
    pub fn estimate_real_line<F: FnMut(f64) -> f64>(&self, mut f: F) -> Estimate {
        self.estimate(
            |t| {
                let s = 1.0 - t * t;
                let out = f(t / s);
                if out == 0.0 {
                    0.0
                } else {
                    out * (1.0 + t * t) / (s * s)
                }
            },
            -1.0,
            1.0,
        )
    }

    pub fn integrate_real_line<F: FnMut(f64) -> f64>(&self, f: F) -> Result<f64> {
        checked(self.estimate_real_line(f))
    }
}

fn checked(e: Estimate) -> Result<f64> {
    if e.converged && e.value.is_finite() {
        Ok(e.value)
    } else {
        Err(Error::QuadratureFailure { estimate: e.value, error: e.error })
    }
}

/// One-dimensional integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    HalfLine(f64),
    RealLine,
}

impl Quadrature {
    pub fn estimate_on<F: FnMut(f64) -> f64>(&self, f: F, domain: Domain) -> Estimate {
        match domain {
            Domain::Interval(a, b) => self.estimate(f, a, b),
            Domain::HalfLine(a) => self.estimate_to_infinity(f, a),
            Domain::RealLine => self.estimate_real_line(f),
        }
    }

    /// Iterated integral `∫_outer ∫_inner(x) f(x, y) dy dx`.
    ///
    /// The inner integrals use `inner_rule`; non-convergence of an inner
    /// integral degrades the outer error estimate rather than failing.
    pub fn estimate_2d<F, D>(&self, inner_rule: &Quadrature, f: F, outer: Domain, inner: D) -> Estimate
    where
        F: Fn(f64, f64) -> f64,
        D: Fn(f64) -> Domain,
    {
        let mut inner_failures = 0usize;
        let mut inner_error = 0.0_f64;
        let mut out = self.estimate_on(
            |x| {
                let e = inner_rule.estimate_on(|y| f(x, y), inner(x));
                if !e.converged {
                    inner_failures += 1;
                    inner_error = inner_error.max(e.error);
                }
                e.value
            },
            outer,
        );
        if inner_failures > 0 {
            out.error += inner_error;
        }
        out
    }
}
