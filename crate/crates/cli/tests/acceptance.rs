//! Acceptance criteria of the library and the command-line tool, one line of
//! output per criterion. Runs without the libtest harness so that every
//! criterion reports even when an earlier one fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use multimatrix::checks::{joint_marginal_gap, reference_marginal, total_mass};
use multimatrix::densities::{
    log_beta1_marginal, log_beta2_marginal, log_pearson2_marginal, log_pearson7_marginal, log_wishart,
};
use multimatrix::diagnostics::ks_test;
use multimatrix::estimation::{fit_beta2, FitConfig};
use multimatrix::sampling::{sample_family, sample_spherical};
use multimatrix::transforms::{compress, expand};
use multimatrix::{BlockStructure, Family, KernelSpec, RealMatrix, RngStream, ShapeParams, SpdMatrix};
use statrs::distribution::{Beta, Cauchy, ChiSquared, Continuous, ContinuousCDF, StudentsT};
use statrs::function::gamma::ln_gamma;

/// Outcome of one criterion: a short summary of the measured quantity, or
/// the reason it failed.
type Verdict = Result<String, String>;

type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within_time(started: Instant, limit: Duration, detail: String) -> Verdict {
    let elapsed = started.elapsed();
    ensure(elapsed < limit, format!("{detail}, {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()))
}

fn scalar_structure(rows: &[usize]) -> (BlockStructure, ShapeParams) {
    let s = BlockStructure::new(rows.to_vec(), 1).unwrap();
    let p = ShapeParams::from_structure(&s);
    (s, p)
}

fn t(x: f64) -> Vec<RealMatrix> {
    vec![RealMatrix::scalar(x).unwrap()]
}

fn f(x: f64) -> Vec<SpdMatrix> {
    vec![SpdMatrix::diagonal(&[x]).unwrap()]
}

fn cauchy_reduction() -> Verdict {
    let started = Instant::now();
    let (s, p) = scalar_structure(&[1, 1]);
    let cauchy = Cauchy::new(0.0, 1.0).unwrap();
    let worst = (0..=100)
        .map(|i| -10.0 + 0.2 * i as f64)
        .map(|x| (log_pearson7_marginal(&t(x), &s, &p).unwrap() - cauchy.ln_pdf(x)).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, format!("max |Δ| = {worst:.2e}"))
        .and_then(|d| within_time(started, Duration::from_secs(1), d))
}

fn arcsine_beta_reductions() -> Verdict {
    let started = Instant::now();
    let (s, p) = scalar_structure(&[1, 1]);
    let beta = Beta::new(0.5, 0.5).unwrap();
    let mut worst = 0.0_f64;
    for i in 1..1000 {
        let r = -1.0 + 0.002 * i as f64;
        let arcsine = -(std::f64::consts::PI * (1.0 - r * r).sqrt()).ln();
        worst = worst.max((log_pearson2_marginal(&t(r), &s, &p).unwrap() - arcsine).abs());
        let b = 0.001 * i as f64;
        worst = worst.max((log_beta1_marginal(&f(b), &s, &p).unwrap() - beta.ln_pdf(b)).abs());
    }
    ensure(worst <= 1e-12, format!("max |Δ| = {worst:.2e}"))
        .and_then(|d| within_time(started, Duration::from_secs(1), d))
}

fn beta_prime_reduction() -> Verdict {
    let mut worst = 0.0_f64;
    for n0 in 1..=3 {
        for n1 in 1..=3 {
            let (s, p) = scalar_structure(&[n0, n1]);
            let (a, b) = (n1 as f64 / 2.0, n0 as f64 / 2.0);
            let norm = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
            for i in 1..=200 {
                let x = 0.1 * i as f64;
                let oracle = (a - 1.0) * x.ln() - (a + b) * x.ln_1p() - norm;
                worst = worst.max((log_beta2_marginal(&f(x), &s, &p).unwrap() - oracle).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max |Δ| = {worst:.2e} over (n0, n1) in {{1,2,3}}²"))
}

/// `ln |W|` by an unpivoted Cholesky factorization.
fn ln_det(w: &[Vec<f64>]) -> f64 {
    let m = w.len();
    let mut l = vec![vec![0.0; m]; m];
    let mut out = 0.0;
    for j in 0..m {
        let d = w[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        l[j][j] = d.sqrt();
        out += d.ln();
        for i in j + 1..m {
            l[i][j] = (w[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    out
}

/// Log density of the standard Wishart law `W_m(n, I)`.
fn ln_standard_wishart(w: &[Vec<f64>], n: usize) -> f64 {
    let (nf, mf) = (n as f64, w.len() as f64);
    let trace: f64 = (0..w.len()).map(|i| w[i][i]).sum();
    let multigamma = mf * (mf - 1.0) / 4.0 * std::f64::consts::PI.ln()
        + (0..w.len()).map(|j| ln_gamma((nf - j as f64) / 2.0)).sum::<f64>();
    (nf - mf - 1.0) / 2.0 * ln_det(w) - trace / 2.0 - nf * mf / 2.0 * 2.0_f64.ln() - multigamma
}

fn wishart_factorization() -> Verdict {
    let mut worst = 0.0_f64;
    for m in 1..=3 {
        let s = BlockStructure::new(vec![m, m + 1, m + 2], m).unwrap();
        let kernel = KernelSpec::normal(s.dim());
        let set = sample_family(Family::Wishart, &s, &kernel, 50, &mut RngStream::new(40 + m as u64)).unwrap();
        for draw in &set.draws {
            let w: Vec<SpdMatrix> = std::iter::once(draw.gram0.clone().unwrap())
                .chain(draw.blocks.iter().map(|b| b.spd().unwrap().clone()))
                .collect();
            let oracle: f64 = w.iter().zip(s.block_rows()).map(|(w, &n)| ln_standard_wishart(&w.to_rows(), n)).sum();
            worst = worst.max((log_wishart(&w, &s, &kernel).unwrap() - oracle).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max |Δ| = {worst:.2e} over 150 inputs, m in 1..=3"))
}

/// Every `m = 1` structure with `n_0 <= 3`, `k` blocks and `n_i <= 2`.
fn tractable_structures(k: usize) -> Vec<BlockStructure> {
    let mut rows: Vec<Vec<usize>> = (1..=3).map(|n0| vec![n0]).collect();
    for _ in 0..k {
        rows = rows.into_iter().flat_map(|r| (1..=2).map(move |n| [r.clone(), vec![n]].concat())).collect();
    }
    rows.into_iter().map(|r| BlockStructure::new(r, 1).unwrap()).collect()
}

fn normalization() -> Verdict {
    let started = Instant::now();
    let families = [
        Family::Pearson7,
        Family::Pearson2,
        Family::Beta2,
        Family::Beta1,
        Family::P7P2,
        Family::B2B1,
        Family::InvB2B1,
        Family::LocatedP7,
    ];
    let mut worst = (0.0_f64, String::new());
    let mut count = 0;
    for family in families {
        let ks = family.fixed_k().map_or(vec![1, 2], |k| vec![k]);
        for s in ks.into_iter().flat_map(tractable_structures) {
            let Some(mass) = total_mass(family, &s, &reference_marginal(family, &s)).unwrap() else {
                return Err(format!("{family} {:?} was not integrated", s.block_rows()));
            };
            count += 1;
            let gap = (mass - 1.0).abs();
            if gap.is_nan() || gap > worst.0 {
                worst = (gap, format!("{family} {:?}", s.block_rows()));
            }
        }
    }
    ensure(worst.0 <= 1e-3, format!("max |mass - 1| = {:.2e} ({}) over {count} forms", worst.0, worst.1))
        .and_then(|d| within_time(started, Duration::from_secs(120), d))
}

fn joint_marginal_consistency() -> Verdict {
    let cases = [
        (Family::Pearson7, vec![1, 1]),
        (Family::Pearson2, vec![1, 1]),
        (Family::Beta2, vec![1, 1]),
        (Family::Beta1, vec![1, 1]),
        (Family::P7P2, vec![1, 1, 1]),
        (Family::B2B1, vec![1, 1, 1]),
    ];
    let mut worst = 0.0_f64;
    for (family, rows) in cases {
        let (s, _) = scalar_structure(&rows);
        let kernel = KernelSpec::normal(s.dim());
        let points = sample_family(family, &s, &kernel, 10, &mut RngStream::new(6)).unwrap();
        for point in &points.draws {
            let gap = joint_marginal_gap(family, &s, &kernel, point).unwrap().abs();
            worst = if gap.is_nan() { f64::NAN } else { worst.max(gap) };
        }
    }
    ensure(worst <= 1e-5, format!("max |ln ∫ joint dv - ln marginal| = {worst:.2e} at 10 points x 6 families"))
}

/// `ln |det J|` of `map` at `x` by central differences.
fn numerical_log_det(map: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> f64 {
    let d = x.len();
    let mut jac = vec![vec![0.0; d]; d];
    for j in 0..d {
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[j] += h;
        down[j] -= h;
        let (fu, fd) = (map(&up), map(&down));
        for i in 0..d {
            jac[i][j] = (fu[i] - fd[i]) / (2.0 * h);
        }
    }
    // Gaussian elimination with partial pivoting
    let mut log_det = 0.0;
    for c in 0..d {
        let p = (c..d).max_by(|&a, &b| jac[a][c].abs().total_cmp(&jac[b][c].abs())).unwrap();
        jac.swap(c, p);
        log_det += jac[c][c].abs().ln();
        let (top, rest) = jac.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let factor = row[c] / pivot[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= factor * p;
            }
        }
    }
    log_det
}

fn jacobians() -> Verdict {
    let shapes = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)];
    let mut rng = RngStream::new(9);
    let mut jacobian_gap = 0.0_f64;
    let mut round_trip_gap = 0.0_f64;
    for (n, m) in shapes {
        let s = BlockStructure::new(vec![n * m], 1).unwrap();
        let kernel = KernelSpec::normal(n * m);
        for _ in 0..20 {
            // a Gaussian point, pulled into the ball by a monotone map of its norm
            let z = sample_spherical(&s, &kernel, &mut rng).unwrap().remove(0).to_row_major();
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radius = 0.05 + 0.9 * (1.0 - (-norm * norm / 2.0).exp());
            let x: Vec<f64> = z.iter().map(|v| v / norm * radius).collect();
            let xm = RealMatrix::from_row_major(n, m, &x).unwrap();

            let (y, log_jac) = expand(&xm).unwrap();
            let fd = numerical_log_det(
                |p| expand(&RealMatrix::from_row_major(n, m, p).unwrap()).unwrap().0.to_row_major(),
                &x,
                1e-5,
            );
            jacobian_gap = jacobian_gap.max((log_jac - fd).abs());
            let y_entries = y.to_row_major();
            let fd = numerical_log_det(
                |p| compress(&RealMatrix::from_row_major(n, m, p).unwrap()).0.to_row_major(),
                &y_entries,
                1e-5,
            );
            let (back, log_back) = compress(&y);
            jacobian_gap = jacobian_gap.max((log_back - fd).abs());
            let entry_gap = back.to_row_major().iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            round_trip_gap = round_trip_gap.max(entry_gap);
        }
    }
    ensure(
        jacobian_gap <= 1e-5 && round_trip_gap <= 1e-12,
        format!("log-Jacobian max |Δ| = {jacobian_gap:.2e}, round trip max |Δ| = {round_trip_gap:.2e}"),
    )
}

fn sampling_laws() -> Verdict {
    const DRAWS: usize = 100_000;
    let mut p_values = Vec::new();

    // V under the Normal kernel, n0 = 3, m = 2
    let s = BlockStructure::new(vec![3, 2], 2).unwrap();
    let set = sample_family(Family::Beta2, &s, &KernelSpec::normal(s.dim()), DRAWS, &mut RngStream::new(1)).unwrap();
    let chi = ChiSquared::new(6.0).unwrap();
    let mut v: Vec<f64> = set.draws.iter().map(|d| d.v).collect();
    p_values.push(("V ~ χ²_6", ks_test(&mut v, |x| chi.cdf(x)).p_value));

    // T √n0 in the scalar case, n0 = 3
    let (s, _) = scalar_structure(&[3, 1]);
    let set = sample_family(Family::Pearson7, &s, &KernelSpec::normal(s.dim()), DRAWS, &mut RngStream::new(2)).unwrap();
    let student = StudentsT::new(0.0, 1.0, 3.0).unwrap();
    let mut scaled: Vec<f64> =
        set.draws.iter().map(|d| d.blocks[0].matrix().unwrap().get(0, 0) * 3.0_f64.sqrt()).collect();
    p_values.push(("T√3 ~ t_3", ks_test(&mut scaled, |x| student.cdf(x)).p_value));

    // F with n0 = n1 = 2
    let (s, _) = scalar_structure(&[2, 2]);
    let set = sample_family(Family::Beta2, &s, &KernelSpec::normal(s.dim()), DRAWS, &mut RngStream::new(3)).unwrap();
    let mut fs: Vec<f64> = set.draws.iter().map(|d| d.blocks[0].spd().unwrap().get(0, 0)).collect();
    // beta-prime(1, 1) has CDF x / (1 + x)
    p_values.push(("F ~ β'(1,1)", ks_test(&mut fs, |x| x / (1.0 + x)).p_value));

    let detail = p_values.iter().map(|(name, p)| format!("{name}: p = {p:.3}")).collect::<Vec<_>>().join(", ");
    ensure(p_values.iter().all(|(_, p)| *p > 0.01), detail)
}

fn parameter_recovery() -> Verdict {
    let started = Instant::now();
    let s = BlockStructure::new(vec![4, 3, 3, 3], 2).unwrap();
    let draw = || {
        let set =
            sample_family(Family::Beta2, &s, &KernelSpec::normal(s.dim()), 400, &mut RngStream::new(2024)).unwrap();
        set.draws
            .iter()
            .map(|d| d.blocks.iter().map(|b| b.spd().unwrap().clone()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let config = FitConfig::default_for(2);
    let first = fit_beta2(&draw(), 2, &config).unwrap();
    let second = fit_beta2(&draw(), 2, &config).unwrap();
    let detail = format!(
        "a0_hat = {:.4}, a_hat = {:.4}, converged = {}, repeat identical = {}",
        first.a0_hat,
        first.a_hat,
        first.converged,
        first == second
    );
    ensure(
        (1.7..=2.3).contains(&first.a0_hat)
            && (1.35..=1.65).contains(&first.a_hat)
            && first.converged
            && first == second,
        detail,
    )
    .and_then(|d| within_time(started, Duration::from_secs(60), d))
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

/// Runs the binary from the workspace root, returning its standard output.
fn multimatrix(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_multimatrix"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(out.stdout)
}

fn estimate_bits(report: &[u8]) -> Result<(u64, u64), String> {
    let value: serde_json::Value = serde_json::from_slice(report).map_err(|e| e.to_string())?;
    let get = |key: &str| value["results"]["fit"][key].as_f64().map(f64::to_bits).ok_or(format!("missing {key}"));
    Ok((get("a0_hat")?, get("a_hat")?))
}

fn workflow_scale() -> Verdict {
    let started = Instant::now();
    let stdout = multimatrix(&["fit", "--data", "data/trajectory_k56.json"])?;
    let golden = std::fs::read(workspace_root().join("data/trajectory_k56.fit.json")).map_err(|e| e.to_string())?;
    let (a0, a) = estimate_bits(&stdout)?;
    ensure(
        estimate_bits(&golden)? == (a0, a) && stdout == golden,
        format!(
            "k = 56 blocks of 21x3, a0_hat = {}, a_hat = {}, report identical to golden = {}",
            f64::from_bits(a0),
            f64::from_bits(a),
            stdout == golden
        ),
    )
    .and_then(|d| within_time(started, Duration::from_secs(30), d))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let sample = |out: &str| {
        multimatrix(&[
            "sample", "--family", "beta2", "--rows", "4,3,3", "--cols", "2", "--kernel", "normal", "--count", "200",
            "--seed", "7", "--out", out,
        ])
    };
    sample(&path("a.json"))?;
    sample(&path("b.json"))?;
    let fit = |out: &str| multimatrix(&["fit", "--data", &path("a.json"), "--out", out]);
    fit(&path("fit_a.json"))?;
    fit(&path("fit_b.json"))?;
    let read = |name: &str| std::fs::read(path(name)).map_err(|e| e.to_string());
    let same_sample = read("a.json")? == read("b.json")?;
    let same_fit = read("fit_a.json")? == read("fit_b.json")?;
    ensure(same_sample && same_fit, format!("sample identical = {same_sample}, fit identical = {same_fit}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("cauchy reduction", cauchy_reduction),
        ("arcsine and beta reductions", arcsine_beta_reductions),
        ("beta-prime reduction", beta_prime_reduction),
        ("wishart factorization", wishart_factorization),
        ("normalization", normalization),
        ("joint-marginal consistency", joint_marginal_consistency),
        ("jacobians", jacobians),
        ("distributional sampling", sampling_laws),
        ("parameter recovery", parameter_recovery),
        ("workflow scale", workflow_scale),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
