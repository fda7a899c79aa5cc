use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use multimatrix::checks::{reference_marginal, total_mass};
use multimatrix::estimation::{fit_beta2, FitConfig};
use multimatrix::sampling::sample_family;
use multimatrix::{BlockStructure, Family, Form, FormKind, KernelSpec, RngStream, ShapeParams, SpdMatrix};

fn log_density(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_density");
    for (rows, m) in [(vec![4, 3, 3, 3], 1), (vec![21, 21, 21, 21], 3)] {
        let s = BlockStructure::new(rows, m).unwrap();
        let kernel = KernelSpec::normal(s.dim());
        for family in [Family::Pearson7, Family::Beta2, Family::Wishart] {
            let draws = sample_family(family, &s, &kernel, 64, &mut RngStream::new(1)).unwrap().draws;
            let form = if family.supports(FormKind::Marginal) {
                Form::Marginal(ShapeParams::from_structure(&s))
            } else {
                Form::Joint(kernel.clone())
            };
            group.bench_with_input(BenchmarkId::new(family.name(), format!("m={m}")), &draws, |b, draws| {
                b.iter(|| draws.iter().map(|d| family.log_density(d, &s, &form).unwrap()).sum::<f64>())
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let s = BlockStructure::new(vec![4, 3, 3, 3], 2).unwrap();
    let kernel = KernelSpec::student_t(s.dim(), 5.0).unwrap();
    c.bench_function("sample_beta2_1000", |b| {
        b.iter(|| sample_family(Family::Beta2, &s, &kernel, 1000, &mut RngStream::new(black_box(7))).unwrap())
    });
}

fn fit(c: &mut Criterion) {
    let s = BlockStructure::new(vec![4, 3, 3, 3], 2).unwrap();
    let set = sample_family(Family::Beta2, &s, &KernelSpec::normal(s.dim()), 400, &mut RngStream::new(2024)).unwrap();
    let data: Vec<Vec<SpdMatrix>> =
        set.draws.iter().map(|d| d.blocks.iter().map(|b| b.spd().unwrap().clone()).collect()).collect();
    c.bench_function("fit_beta2_400", |b| b.iter(|| fit_beta2(&data, 2, &FitConfig::default_for(2)).unwrap()));
}

fn normalization(c: &mut Criterion) {
    let s = BlockStructure::new(vec![2, 2, 1], 1).unwrap();
    c.bench_function("total_mass_pearson7_2d", |b| {
        b.iter(|| total_mass(Family::Pearson7, &s, &reference_marginal(Family::Pearson7, &s)).unwrap())
    });
}

criterion_group!(benches, log_density, sampling, fit, normalization);
criterion_main!(benches);
