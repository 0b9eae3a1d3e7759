//! A short tour: build a model and a target, estimate, certify, and look at
//! the divergence phenomenon that motivates the median-of-means fallback.

use cmest::exec::Parallelism;
use cmest::models::ExpFamilyModel;
use cmest::qfunc::QFunction;
use cmest::verify::{self, CertifyOptions, DivergenceOptions};
use cmest::EstimatorSpec;

fn main() {
    // Mills ratio: the normal-model unbiased estimator of 1/theta
    let normal = EstimatorSpec::new(ExpFamilyModel::normal(), QFunction::reciprocal());
    let e = normal.estimate(0.0).unwrap();
    println!("normal, q = 1/theta, x = 0: {} ({})", e.value, e.method);

    // a quadrature-only pair: gamma base with a shifted-power target
    let spec = EstimatorSpec::new(
        ExpFamilyModel::gamma(2.0).unwrap(),
        QFunction::shifted_power(0.5, 1.5).unwrap(),
    );
    let e = spec.estimate(2.0).unwrap();
    println!(
        "gamma(2), q = (0.5 + theta)^-1.5, x = 2: {} ({}, bound {:.1e})",
        e.value,
        e.method,
        e.quadrature_error_bound.unwrap()
    );

    // Monte Carlo certification of unbiasedness at theta' = 1
    let report = verify::certify(
        &spec,
        1.0,
        &CertifyOptions {
            n: 200_000,
            seed: 7,
            ..Default::default()
        },
    )
    .unwrap();
    println!(
        "certify: mean {:.5} vs target {:.5}, z = {:+.2}, pass = {}",
        report.sample_mean, report.target, report.z_score, report.pass
    );

    // the normal reciprocal estimator has no second moment; its robust
    // certificate is a median of batch means
    let mom = verify::median_of_means(&normal, 1.0, 50, 5_000, 1, Parallelism::default()).unwrap();
    println!(
        "normal reciprocal, median-of-means: {:.4} (target {})",
        mom.median_of_means, mom.target
    );
    let div = verify::divergence_demo(
        1.0,
        &DivergenceOptions {
            n_schedule: vec![10_000, 100_000],
            ..Default::default()
        },
    )
    .unwrap();
    println!(
        "second-moment integrand exceeds 1e6 at x = {:.3}",
        div.threshold_crossings[1].x
    );
}
