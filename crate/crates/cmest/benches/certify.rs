//! Monte Carlo certification throughput: rayon vs the sequential fallback,
//! on a closed-form estimator and on a quadrature-path estimator, plus the
//! kernel-quadrature microbenchmark.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cmest::exec::Parallelism;
use cmest::models::ExpFamilyModel;
use cmest::qfunc::QFunction;
use cmest::verify::{self, CertifyOptions};
use cmest::EstimatorSpec;

fn modes() -> Vec<(&'static str, Parallelism)> {
    let mut m = vec![("sequential", Parallelism::Sequential)];
    #[cfg(feature = "parallel")]
    m.push(("rayon", Parallelism::Rayon));
    m
}

fn bench_certify_closed_form(c: &mut Criterion) {
    let spec = EstimatorSpec::new(ExpFamilyModel::gamma(2.0).unwrap(), QFunction::reciprocal());
    let mut group = c.benchmark_group("certify/gamma-recip-n1e5");
    group.sample_size(20);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                let opts = CertifyOptions {
                    n: 100_000,
                    seed: 1,
                    z_max: 4.0,
                    parallelism: mode,
                };
                black_box(verify::certify(&spec, 1.0, &opts).unwrap())
            })
        });
    }
    group.finish();
}

fn bench_certify_quadrature_path(c: &mut Criterion) {
    let spec = EstimatorSpec::new(
        ExpFamilyModel::gamma(3.0).unwrap(),
        QFunction::power(2.0).unwrap(),
    );
    let mut group = c.benchmark_group("certify/gamma-power2-n1e5");
    group.sample_size(10);
    for (label, mode) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &mode, |b, &mode| {
            b.iter(|| {
                let opts = CertifyOptions {
                    n: 100_000,
                    seed: 1,
                    z_max: 4.0,
                    parallelism: mode,
                };
                black_box(verify::certify(&spec, 1.0, &opts).unwrap())
            })
        });
    }
    group.finish();
}

fn bench_kernel_quadrature(c: &mut Criterion) {
    let normal = EstimatorSpec::new(ExpFamilyModel::normal(), QFunction::reciprocal());
    let ig = EstimatorSpec::new(
        ExpFamilyModel::inverse_gaussian(1.0).unwrap(),
        QFunction::reciprocal(),
    );
    let mut group = c.benchmark_group("estimate-quadrature");
    group.bench_function("normal-recip-x1", |b| {
        b.iter(|| black_box(normal.estimate_quadrature(black_box(1.0)).unwrap()))
    });
    group.bench_function("invgauss-recip-x1", |b| {
        b.iter(|| black_box(ig.estimate_quadrature(black_box(1.0)).unwrap()))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_certify_closed_form,
    bench_certify_quadrature_path,
    bench_kernel_quadrature
);
criterion_main!(benches);
