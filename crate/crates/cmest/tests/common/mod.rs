//! Independent oracles for the integration tests: composite Simpson
//! quadrature, a Lentz continued-fraction Mills ratio, and a rational
//! normal CDF. None of these share code with the library's tanh-sinh /
//! erfc-based paths, so agreement is evidence, not tautology.

/// Composite Simpson rule with `2n` panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let m = 2 * n;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Mills ratio by the Laplace continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + ...))))`, evaluated with modified Lentz.
/// Converges for x > 0; slow but accurate near 0.
pub fn mills_continued_fraction(x: f64) -> f64 {
    assert!(x > 0.0);
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let mut c = f;
    let mut d = 0.0;
    for i in 1..200_000u64 {
        let an = i as f64;
        d = x + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Normal CDF by the Abramowitz-Stegun 26.2.17 rational fit (|err| < 7.5e-8).
/// Deliberately a different algorithm from the library's erfc route.
pub fn normal_cdf_rational(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.2316419 * x.abs());
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let tail = phi(x.abs()) * poly;
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Inverse Gaussian CDF from its closed form in terms of the normal CDF.
pub fn inverse_gaussian_cdf(x: f64, mu: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let s = (lambda / x).sqrt();
    normal_cdf_rational(s * (x / mu - 1.0))
        + (2.0 * lambda / mu).exp() * normal_cdf_rational(-s * (x / mu + 1.0))
}

/// Inverse-CDF sampler for the inverse Gaussian built by bisection on the
/// closed-form CDF; the "second sampler" oracle.
pub fn inverse_gaussian_quantile(p: f64, mu: f64, lambda: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let mut lo = 0.0;
    let mut hi = mu;
    while inverse_gaussian_cdf(hi, mu, lambda) < p {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if inverse_gaussian_cdf(mid, mu, lambda) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
