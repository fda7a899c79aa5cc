use multimatrix::densities::{
    log_beta1_marginal, log_beta2_marginal, log_pearson2_marginal, log_pearson7_marginal, log_wishart,
};
use multimatrix::{BlockStructure, KernelSpec, RealMatrix, ShapeParams, SpdMatrix};
use proptest::prelude::*;
use statrs::distribution::{Beta, Cauchy, Continuous, StudentsT};
use statrs::function::gamma::ln_gamma;

fn scalar_structure(n0: usize, n1: usize) -> (BlockStructure, ShapeParams) {
    let s = BlockStructure::new(vec![n0, n1], 1).unwrap();
    let p = ShapeParams::from_structure(&s);
    (s, p)
}

fn t(x: f64) -> Vec<RealMatrix> {
    vec![RealMatrix::scalar(x).unwrap()]
}

fn f(x: f64) -> Vec<SpdMatrix> {
    vec![SpdMatrix::diagonal(&[x]).unwrap()]
}

#[test]
fn pearson7_is_scaled_student_t() {
    let cauchy = Cauchy::new(0.0, 1.0).unwrap();
    for n0 in 1..=5 {
        let (s, p) = scalar_structure(n0, 1);
        let student = StudentsT::new(0.0, 1.0, n0 as f64).unwrap();
        let root = (n0 as f64).sqrt();
        for i in 0..=100 {
            let x = -10.0 + 0.2 * i as f64;
            let got = log_pearson7_marginal(&t(x), &s, &p).unwrap();
            assert!((got - (student.ln_pdf(root * x) + root.ln())).abs() < 1e-12);
            if n0 == 1 {
                assert!((got - cauchy.ln_pdf(x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn pearson2_and_beta1_reduce_to_arcsine_laws() {
    let (s, p) = scalar_structure(1, 1);
    let beta = Beta::new(0.5, 0.5).unwrap();
    for i in 1..100 {
        let r = -1.0 + 0.02 * i as f64;
        let arcsine = -(std::f64::consts::PI * (1.0 - r * r).sqrt()).ln();
        assert!((log_pearson2_marginal(&t(r), &s, &p).unwrap() - arcsine).abs() < 1e-12);
        let b = 0.01 * i as f64;
        assert!((log_beta1_marginal(&f(b), &s, &p).unwrap() - beta.ln_pdf(b)).abs() < 1e-12);
    }
}

/// `ln` of the beta-prime(a, b) density from `statrs` gamma functions.
fn beta_prime(x: f64, a: f64, b: f64) -> f64 {
    (a - 1.0) * x.ln() - (a + b) * x.ln_1p() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

#[test]
fn beta2_is_beta_prime() {
    for n0 in 1..=3 {
        for n1 in 1..=3 {
            let (s, p) = scalar_structure(n0, n1);
            for i in 1..=100 {
                let x = 0.15 * i as f64;
                let got = log_beta2_marginal(&f(x), &s, &p).unwrap();
                assert!((got - beta_prime(x, n1 as f64 / 2.0, n0 as f64 / 2.0)).abs() < 1e-12, "{n0} {n1} {x}");
            }
        }
    }
}

fn ln_standard_wishart(w: &[Vec<f64>], n: usize) -> f64 {
    let m = w.len();
    let a = nalgebra::DMatrix::from_fn(m, m, |i, j| w[i][j]);
    let chol = a.clone().cholesky().unwrap();
    let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let (nf, mf) = (n as f64, m as f64);
    let multigamma = mf * (mf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (0..m).map(|j| ln_gamma(nf / 2.0 - j as f64 / 2.0)).sum::<f64>();
    (nf - mf - 1.0) / 2.0 * log_det - a.trace() / 2.0 - nf * mf / 2.0 * 2.0_f64.ln() - multigamma
}

fn spd_entries(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-1.5..1.5_f64, m * m).prop_map(move |e| {
        let l = nalgebra::DMatrix::from_row_slice(m, m, &e);
        let w = &l * l.transpose() + nalgebra::DMatrix::identity(m, m) * 0.2;
        (0..m).map(|i| (0..m).map(|j| w[(i, j)]).collect()).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_wishart_blocks_are_independent(
        (m, extra, blocks) in (1usize..=3).prop_flat_map(|m| {
            (Just(m), prop::collection::vec(0usize..3, 3), prop::collection::vec(spd_entries(m), 3))
        }),
    ) {
        let rows: Vec<usize> = extra.iter().map(|e| m + e).collect();
        let s = BlockStructure::new(rows.clone(), m).unwrap();
        let w: Vec<SpdMatrix> = blocks.iter().map(|b| SpdMatrix::from_rows(b).unwrap()).collect();
        let got = log_wishart(&w, &s, &KernelSpec::normal(s.dim())).unwrap();
        let expected: f64 = blocks.iter().zip(&rows).map(|(b, &n)| ln_standard_wishart(b, n)).sum();
        prop_assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0), "{got} vs {expected}");
    }
}
