//! Goodness-of-fit machinery for Monte Carlo checks: the one-sample
//! Kolmogorov–Smirnov test and CDFs tabulated by quadrature from a density.

use crate::quadrature::{Domain, Quadrature};
use crate::special::ln_gamma_unchecked;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test of `samples` against `cdf`. Sorts `samples` in place.
pub fn ks_test<F: FnMut(f64) -> f64>(samples: &mut [f64], mut cdf: F) -> KsResult {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    KsResult { statistic: d, p_value: kolmogorov_sf(d, n), n }
}

/// Asymptotic p-value `P(D_n > d)` with Stephens' small-sample correction.
pub fn kolmogorov_sf(d: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let sqrt_n = (n as f64).sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// `ln` of the Beta(a, b) density on (0, 1).
pub fn beta_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
}

/// `ln` of the beta-prime(a, b) density `x^{a-1} (1+x)^{-a-b} / B(a, b)`.
pub fn beta_prime_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() - (a + b) * x.ln_1p() - ln_beta(a, b)
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// A CDF obtained by integrating a density on a fixed grid of the mapped
/// coordinate, refined exactly between the grid node and each query point.
pub struct TabulatedCdf<F: Fn(f64) -> f64> {
    density: F,
    domain: Domain,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
    rule: Quadrature,
}

impl<F: Fn(f64) -> f64> TabulatedCdf<F> {
    pub fn new(density: F, domain: Domain, panels: usize) -> Self {
        let rule = Quadrature { rel_tol: 1e-10, abs_tol: 1e-13, max_intervals: 200 };
        let (lo, hi) = t_range(domain);
        let nodes: Vec<f64> = (0..=panels).map(|i| lo + (hi - lo) * i as f64 / panels as f64).collect();
        let mut cumulative = Vec::with_capacity(nodes.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in nodes.windows(2) {
            acc += rule.estimate(|t| mapped(&density, domain, t), w[0], w[1]).value;
            cumulative.push(acc);
        }
        Self { density, domain, nodes, cumulative, total: acc, rule }
    }

    /// Total mass of the unnormalized density.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Normalized CDF at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let t = to_t(self.domain, x);
        let (lo, hi) = t_range(self.domain);
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let i = match self.nodes.binary_search_by(|n| n.total_cmp(&t)) {
            Ok(i) => return self.cumulative[i] / self.total,
            Err(i) => i - 1,
        };
        let partial = self.rule.estimate(|s| mapped(&self.density, self.domain, s), self.nodes[i], t).value;
        ((self.cumulative[i] + partial) / self.total).clamp(0.0, 1.0)
    }
}

fn t_range(domain: Domain) -> (f64, f64) {
    match domain {
        Domain::Interval(_, _) | Domain::HalfLine(_) => (0.0, 1.0),
        Domain::RealLine => (-1.0, 1.0),
    }
}

fn to_t(domain: Domain, x: f64) -> f64 {
    match domain {
        Domain::Interval(a, b) => (x - a) / (b - a),
        Domain::HalfLine(a) => {
            let y = x - a;
            if y <= 0.0 {
                0.0
            } else {
                y / (1.0 + y)
            }
        }
        Domain::RealLine => 2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt()),
    }
}

fn mapped<F: Fn(f64) -> f64>(density: &F, domain: Domain, t: f64) -> f64 {
    let (x, jac) = match domain {
        Domain::Interval(a, b) => (a + (b - a) * t, b - a),
        Domain::HalfLine(a) => {
            let s = 1.0 - t;
            (a + t / s, 1.0 / (s * s))
        }
        Domain::RealLine => {
            let s = 1.0 - t * t;
            (t / s, (1.0 + t * t) / (s * s))
        }
    };
    let f = density(x);
    if f == 0.0 {
        0.0
    } else {
        f * jac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;
    use std::f64::consts::PI;

    #[test]
    fn kolmogorov_tail_values() {
        // Q(λ) at textbook critical values: 1.36 → 0.05, 1.63 → 0.01
        let n = 1_000_000;
        let scale = (n as f64).sqrt();
        assert!((kolmogorov_sf(1.358 / scale, n) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_sf(1.628 / scale, n) - 0.01).abs() < 5e-4);
        assert_eq!(kolmogorov_sf(0.0, 10), 1.0);
    }

    #[test]
    fn uniform_samples_pass() {
        let mut rng = RngStream::new(5);
        let mut xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_test(&mut xs, |x| x).p_value > 0.01);
        let mut xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>().powi(2)).collect();
        assert!(ks_test(&mut xs, |x| x).p_value < 1e-6);
    }

    #[test]
    fn tabulated_cdf_matches_closed_forms() {
        let cauchy = TabulatedCdf::new(|x| 1.0 / (PI * (1.0 + x * x)), Domain::RealLine, 400);
        assert!((cauchy.total() - 1.0).abs() < 1e-9);
        for x in [-30.0_f64, -1.0, 0.0, 0.3, 2.0, 100.0] {
            let exact = 0.5 + x.atan() / PI;
            assert!((cauchy.cdf(x) - exact).abs() < 1e-9, "x = {x}");
        }
        // arcsine-type singularities at both ends
        let beta = TabulatedCdf::new(|x| beta_log_pdf(x, 0.5, 0.5).exp(), Domain::Interval(0.0, 1.0), 400);
        for x in [1e-8_f64, 0.01, 0.5, 0.99] {
            let exact = 2.0 / PI * x.sqrt().asin();
            assert!((beta.cdf(x) - exact).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn correlation_extremes() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((correlation(&xs, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!((correlation(&xs, &[-1.0, -2.0, -3.0, -4.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_form_densities() {
        assert!((beta_prime_log_pdf(1.0, 1.0, 1.0) - 0.25_f64.ln()).abs() < 1e-14);
        assert!((beta_log_pdf(0.5, 0.5, 0.5) - (2.0 / PI).ln()).abs() < 1e-14);
        assert_eq!(beta_log_pdf(1.0, 2.0, 2.0), f64::NEG_INFINITY);
    }
}
