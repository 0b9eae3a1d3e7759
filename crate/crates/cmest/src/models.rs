//! One-parameter continuous exponential families in natural form.
//!
//! A model is a density `h(x) exp(s * theta * x - A(theta))` with respect to
//! Lebesgue measure, where `s = +1` for families supported on `(-inf, a)`
//! and `s = -1` for families supported on `(a', inf)` parametrized by a
//! positive rate (the sign-flipped convention). Truncated variants carry
//! the truncation bound in their support and fold the renormalization into
//! the log-partition function, so `log_density` is always normalized.
//!
//! Models are immutable after construction and safe to share across
//! threads; samplers take the RNG explicitly so callers control seeding.

use std::fmt;
use std::sync::Arc;

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;

use crate::numerics::special::{
    log_gamma, log_std_normal_cdf, log_std_normal_pdf, log_upper_incomplete_gamma_regularized,
    std_normal_quantile, upper_incomplete_gamma_regularized,
};
use crate::parse::{kv_pairs, parse_positive, ParseError};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync>;

/// Which way the support is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Support `(-inf, a)`: the natural parameter multiplies `+x`.
    LowerUnbounded,
    /// Support `(a', inf)`: parametrized by a positive rate multiplying `-x`.
    UpperUnbounded,
}

/// Support of a model: orientation, the open endpoint of the untruncated
/// family, and an optional truncation bound strictly inside the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub orientation: Orientation,
    pub endpoint: f64,
    pub truncation: Option<f64>,
}

impl Support {
    pub fn lower_unbounded(endpoint: f64) -> Self {
        Support {
            orientation: Orientation::LowerUnbounded,
            endpoint,
            truncation: None,
        }
    }

    pub fn upper_unbounded(endpoint: f64) -> Self {
        Support {
            orientation: Orientation::UpperUnbounded,
            endpoint,
            truncation: None,
        }
    }

    pub fn truncated_at(mut self, bound: f64) -> Self {
        self.truncation = Some(bound);
        self
    }

    /// The effective open interval, truncation included.
    pub fn interval(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::LowerUnbounded => {
                (f64::NEG_INFINITY, self.truncation.unwrap_or(self.endpoint))
            }
            Orientation::UpperUnbounded => {
                (self.truncation.unwrap_or(self.endpoint), f64::INFINITY)
            }
        }
    }

    /// The endpoint the estimator integrates toward: the truncation bound
    /// when present, the family endpoint otherwise.
    pub fn integration_endpoint(&self) -> f64 {
        self.truncation.unwrap_or(self.endpoint)
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.interval();
        x > lo && x < hi
    }

    fn validate(&self) -> Result<(), ModelError> {
        if let Some(b) = self.truncation {
            let ok = match self.orientation {
                Orientation::LowerUnbounded => b.is_finite() && b < self.endpoint,
                Orientation::UpperUnbounded => b.is_finite() && b > self.endpoint,
            };
            if !ok {
                return Err(ModelError::InvalidParameter {
                    name: "truncation",
                    value: b,
                    requirement: "finite and strictly inside the untruncated support",
                });
            }
        }
        Ok(())
    }
}

/// Discriminant used for fast-path dispatch and prepared samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Natural-form normal with h(y) = phi(y/sigma)/sigma and theta = mu/sigma^2.
    Normal {
        sigma: f64,
    },
    /// Normal conditioned on `(-inf, bound)`.
    TruncatedNormal {
        sigma: f64,
        bound: f64,
    },
    /// Gamma with known shape, rate-parametrized (sign-flipped orientation).
    Gamma {
        alpha: f64,
    },
    /// Gamma conditioned on `(bound, inf)`.
    TruncatedGamma {
        alpha: f64,
        bound: f64,
    },
    /// Inverse Gaussian with known shape, rate theta' = lambda / (2 mu^2).
    InverseGaussian {
        lambda: f64,
    },
    Custom,
}

/// Hint for the estimator's quadrature route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadHint {
    Direct,
    /// Substitute t = lambda/s so the kernel becomes a chi-square(1) shape;
    /// removes the essential-singularity boundary layer of the IG base
    /// density at the origin.
    InverseArgument {
        lambda: f64,
    },
}

/// Errors from model construction, evaluation and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    ThetaOutOfDomain {
        theta: f64,
        lo: f64,
        hi: f64,
    },
    OutsideSupport {
        x: f64,
        lo: f64,
        hi: f64,
    },
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    ZeroSamples,
    NoSampler,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ThetaOutOfDomain { theta, lo, hi } => {
                write!(
                    f,
                    "theta = {theta} outside the parameter domain ({lo}, {hi})"
                )
            }
            ModelError::OutsideSupport { x, lo, hi } => {
                write!(f, "x = {x} outside the support ({lo}, {hi})")
            }
            ModelError::InvalidParameter {
                name,
                value,
                requirement,
            } => write!(
                f,
                "parameter {name} = {value} invalid: must be {requirement}"
            ),
            ModelError::ZeroSamples => write!(f, "sample count must be at least 1"),
            ModelError::NoSampler => write!(f, "model has no sampler attached"),
        }
    }
}

impl std::error::Error for ModelError {}

/// A one-parameter continuous exponential family in natural form.
#[derive(Clone)]
pub struct ExpFamilyModel {
    name: String,
    kind: ModelKind,
    support: Support,
    theta_domain: (f64, f64),
    log_h: RealFn,
    log_partition: RealFn,
    mean_fn: Option<RealFn>,
    custom_sampler: Option<SamplerFn>,
    quad_hint: QuadHint,
}

impl fmt::Debug for ExpFamilyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpFamilyModel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("support", &self.support)
            .field("theta_domain", &self.theta_domain)
            .finish()
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ModelError::InvalidParameter {
            name,
            value,
            requirement: "finite and > 0",
        });
    }
    Ok(())
}

impl ExpFamilyModel {
    /// Standard normal-location family: h = phi, support all of R, A = theta^2/2.
    pub fn normal() -> Self {
        Self::scaled_normal(1.0).expect("sigma = 1 is valid")
    }

    /// Natural-form normal observed on its original scale: for Y ~ N(mu, sigma^2)
    /// with sigma known, h(y) = phi(y/sigma)/sigma and theta = mu/sigma^2.
    pub fn scaled_normal(sigma: f64) -> Result<Self, ModelError> {
        require_positive("sigma", sigma)?;
        let s = sigma;
        let name = if (s - 1.0).abs() == 0.0 {
            "normal".to_string()
        } else {
            format!("normal:sigma={s}")
        };
        Ok(ExpFamilyModel {
            name,
            kind: ModelKind::Normal { sigma: s },
            support: Support::lower_unbounded(f64::INFINITY),
            theta_domain: (f64::NEG_INFINITY, f64::INFINITY),
            log_h: Arc::new(move |y| log_std_normal_pdf(y / s) - s.ln()),
            log_partition: Arc::new(move |t| 0.5 * s * s * t * t),
            mean_fn: Some(Arc::new(move |t| s * s * t)),
            custom_sampler: None,
            quad_hint: QuadHint::Direct,
        })
    }

    /// Normal truncated to `(-inf, bound)`; theta = mu/sigma^2 as for
    /// [`ExpFamilyModel::scaled_normal`].
    pub fn truncated_normal(sigma: f64, bound: f64) -> Result<Self, ModelError> {
        require_positive("sigma", sigma)?;
        if !bound.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "b",
                value: bound,
                requirement: "finite",
            });
        }
        let s = sigma;
        let b = bound;
        let support = Support::lower_unbounded(f64::INFINITY).truncated_at(b);
        support.validate()?;
        Ok(ExpFamilyModel {
            name: format!("truncnormal:sigma={s},b={b}"),
            kind: ModelKind::TruncatedNormal { sigma: s, bound: b },
            support,
            theta_domain: (f64::NEG_INFINITY, f64::INFINITY),
            log_h: Arc::new(move |y| log_std_normal_pdf(y / s) - s.ln()),
            log_partition: Arc::new(move |t| {
                let mu = s * s * t;
                0.5 * s * s * t * t + log_std_normal_cdf((b - mu) / s)
            }),
            mean_fn: Some(Arc::new(move |t| {
                let mu = s * s * t;
                let beta = (b - mu) / s;
                mu - s * f64::exp(log_std_normal_pdf(beta) - log_std_normal_cdf(beta))
            })),
            custom_sampler: None,
            quad_hint: QuadHint::Direct,
        })
    }

    /// Gamma with known shape alpha, rate-parametrized: h(x) = x^(alpha-1) on
    /// (0, inf), density (theta'^alpha / Gamma(alpha)) x^(alpha-1) e^(-theta' x).
    pub fn gamma(alpha: f64) -> Result<Self, ModelError> {
        require_positive("alpha", alpha)?;
        let a = alpha;
        let lg = log_gamma(a);
        Ok(ExpFamilyModel {
            name: format!("gamma:alpha={a}"),
            kind: ModelKind::Gamma { alpha: a },
            support: Support::upper_unbounded(0.0),
            theta_domain: (0.0, f64::INFINITY),
            log_h: Arc::new(move |x| (a - 1.0) * x.ln()),
            log_partition: Arc::new(move |t| lg - a * t.ln()),
            mean_fn: Some(Arc::new(move |t| a / t)),
            custom_sampler: None,
            quad_hint: QuadHint::Direct,
        })
    }

    /// Gamma conditioned on `(bound, inf)`, bound > 0.
    pub fn truncated_gamma(alpha: f64, bound: f64) -> Result<Self, ModelError> {
        require_positive("alpha", alpha)?;
        require_positive("trunc_lo", bound)?;
        let a = alpha;
        let b = bound;
        let lg = log_gamma(a);
        let support = Support::upper_unbounded(0.0).truncated_at(b);
        support.validate()?;
        Ok(ExpFamilyModel {
            name: format!("gamma:alpha={a},trunc_lo={b}"),
            kind: ModelKind::TruncatedGamma { alpha: a, bound: b },
            support,
            theta_domain: (0.0, f64::INFINITY),
            log_h: Arc::new(move |x| (a - 1.0) * x.ln()),
            log_partition: Arc::new(move |t| {
                lg - a * t.ln() + log_upper_incomplete_gamma_regularized(a, t * b)
            }),
            mean_fn: Some(Arc::new(move |t| {
                let yb = t * b;
                (a / t)
                    * f64::exp(
                        log_upper_incomplete_gamma_regularized(a + 1.0, yb)
                            - log_upper_incomplete_gamma_regularized(a, yb),
                    )
            })),
            custom_sampler: None,
            quad_hint: QuadHint::Direct,
        })
    }

    /// Inverse Gaussian with known shape lambda: h(x) = x^(-3/2) e^(-lambda/(2x))
    /// on (0, inf), rate theta' = lambda / (2 mu^2).
    pub fn inverse_gaussian(lambda: f64) -> Result<Self, ModelError> {
        require_positive("lambda", lambda)?;
        let l = lambda;
        let half_log_l_over_2pi = 0.5 * (l / (2.0 * std::f64::consts::PI)).ln();
        Ok(ExpFamilyModel {
            name: format!("invgauss:lambda={l}"),
            kind: ModelKind::InverseGaussian { lambda: l },
            support: Support::upper_unbounded(0.0),
            theta_domain: (0.0, f64::INFINITY),
            log_h: Arc::new(move |x| -1.5 * x.ln() - l / (2.0 * x)),
            log_partition: Arc::new(move |t| -half_log_l_over_2pi - (2.0 * l * t).sqrt()),
            mean_fn: Some(Arc::new(move |t| (l / (2.0 * t)).sqrt())),
            custom_sampler: None,
            quad_hint: QuadHint::InverseArgument { lambda: l },
        })
    }

    /// A user-supplied family. The caller guarantees that `exp(log_h)` is
    /// integrable against `exp(s theta x)` on the stated theta domain.
    pub fn custom<H, A>(
        name: impl Into<String>,
        support: Support,
        theta_domain: (f64, f64),
        log_h: H,
        log_partition: A,
    ) -> Result<Self, ModelError>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
        A: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        support.validate()?;
        Ok(ExpFamilyModel {
            name: name.into(),
            kind: ModelKind::Custom,
            support,
            theta_domain,
            log_h: Arc::new(log_h),
            log_partition: Arc::new(log_partition),
            mean_fn: None,
            custom_sampler: None,
            quad_hint: QuadHint::Direct,
        })
    }

    pub fn with_mean_fn<M>(mut self, mean: M) -> Self
    where
        M: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.mean_fn = Some(Arc::new(mean));
        self
    }

    pub fn with_sampler<S>(mut self, sampler: S) -> Self
    where
        S: Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        self.custom_sampler = Some(Arc::new(sampler));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn quad_hint(&self) -> QuadHint {
        self.quad_hint
    }

    pub fn theta_domain(&self) -> (f64, f64) {
        self.theta_domain
    }

    /// +1 for the lower-unbounded orientation, -1 for the rate-parametrized
    /// upper-unbounded one.
    pub fn natural_sign(&self) -> f64 {
        match self.support.orientation {
            Orientation::LowerUnbounded => 1.0,
            Orientation::UpperUnbounded => -1.0,
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<(), ModelError> {
        let (lo, hi) = self.theta_domain;
        if theta.is_finite() && theta > lo && theta < hi {
            Ok(())
        } else {
            Err(ModelError::ThetaOutOfDomain { theta, lo, hi })
        }
    }

    pub fn check_support(&self, x: f64) -> Result<(), ModelError> {
        if self.support.contains(x) {
            Ok(())
        } else {
            let (lo, hi) = self.support.interval();
            Err(ModelError::OutsideSupport { x, lo, hi })
        }
    }

    pub fn log_h(&self, x: f64) -> f64 {
        (self.log_h)(x)
    }

    pub fn log_partition(&self, theta: f64) -> f64 {
        (self.log_partition)(theta)
    }

    /// E_theta[X] when a closed form is attached (equals A'(theta)).
    pub fn mean(&self, theta: f64) -> Option<f64> {
        self.mean_fn.as_ref().map(|m| m(theta))
    }

    /// Normalized log density, truncation included.
    pub fn log_density(&self, theta: f64, x: f64) -> Result<f64, ModelError> {
        self.check_theta(theta)?;
        self.check_support(x)?;
        Ok(self.log_h(x) + self.natural_sign() * theta * x - self.log_partition(theta))
    }

    fn prepared_sampler(&self, theta: f64) -> Result<PreparedSampler, ModelError> {
        self.check_theta(theta)?;
        let bad = |name: &'static str| ModelError::InvalidParameter {
            name,
            value: theta,
            requirement: "a valid sampler parametrization",
        };
        Ok(match self.kind {
            ModelKind::Normal { sigma } => {
                let mu = sigma * sigma * theta;
                PreparedSampler::Normal(
                    rand_distr::Normal::new(mu, sigma).map_err(|_| bad("theta"))?,
                )
            }
            ModelKind::TruncatedNormal { sigma, bound } => {
                let mu = sigma * sigma * theta;
                let p_below = f64::exp(log_std_normal_cdf((bound - mu) / sigma));
                if p_below <= 0.0 {
                    return Err(ModelError::InvalidParameter {
                        name: "theta",
                        value: theta,
                        requirement: "leave representable mass below the truncation bound",
                    });
                }
                PreparedSampler::TruncatedNormal {
                    mu,
                    sigma,
                    bound,
                    p_below,
                }
            }
            ModelKind::Gamma { alpha } => PreparedSampler::Gamma(
                rand_distr::Gamma::new(alpha, 1.0 / theta).map_err(|_| bad("theta"))?,
            ),
            ModelKind::TruncatedGamma { alpha, bound } => {
                let yb = theta * bound;
                let q_at_bound = upper_incomplete_gamma_regularized(alpha, yb);
                if q_at_bound <= 0.0 {
                    return Err(ModelError::InvalidParameter {
                        name: "theta",
                        value: theta,
                        requirement: "leave representable mass above the truncation bound",
                    });
                }
                PreparedSampler::TruncatedGamma {
                    alpha,
                    rate: theta,
                    yb,
                    q_at_bound,
                    log_gamma_alpha: log_gamma(alpha),
                }
            }
            ModelKind::InverseGaussian { lambda } => {
                let mu = (lambda / (2.0 * theta)).sqrt();
                PreparedSampler::InverseGaussian(
                    rand_distr::InverseGaussian::new(mu, lambda).map_err(|_| bad("theta"))?,
                )
            }
            ModelKind::Custom => match &self.custom_sampler {
                Some(s) => PreparedSampler::Custom(Arc::clone(s), theta),
                None => return Err(ModelError::NoSampler),
            },
        })
    }

    /// Draws `n` i.i.d. variates using the supplied generator.
    pub fn sample_with(
        &self,
        theta: f64,
        n: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroSamples);
        }
        let sampler = self.prepared_sampler(theta)?;
        Ok((0..n).map(|_| sampler.draw(rng)).collect())
    }

    /// Deterministic seeded sampling; bit-reproducible for a fixed build.
    pub fn sample(&self, theta: f64, n: usize, seed: u64) -> Result<Vec<f64>, ModelError> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        self.sample_with(theta, n, &mut rng)
    }

    /// Reduces an i.i.d. sample to its sufficient statistic T = sum(x_i)
    /// together with the family T follows, which keeps the same natural
    /// parameter. Available for the families closed under summation.
    pub fn sufficient_reduction(
        &self,
        sample: &[f64],
    ) -> Result<(ExpFamilyModel, f64), ModelError> {
        if sample.is_empty() {
            return Err(ModelError::ZeroSamples);
        }
        let n = sample.len() as f64;
        let t: f64 = sample.iter().sum();
        match self.kind {
            ModelKind::Normal { sigma } => {
                Ok((ExpFamilyModel::scaled_normal(sigma * n.sqrt())?, t))
            }
            ModelKind::Gamma { alpha } => Ok((ExpFamilyModel::gamma(alpha * n)?, t)),
            ModelKind::InverseGaussian { lambda } => {
                Ok((ExpFamilyModel::inverse_gaussian(lambda * n * n)?, t))
            }
            _ => Err(ModelError::InvalidParameter {
                name: "model",
                value: n,
                requirement: "a family closed under i.i.d. summation (normal, gamma, invgauss)",
            }),
        }
    }
}

/// Per-theta sampler with its distribution state set up once.
pub(crate) enum PreparedSampler {
    Normal(rand_distr::Normal<f64>),
    TruncatedNormal {
        mu: f64,
        sigma: f64,
        bound: f64,
        p_below: f64,
    },
    Gamma(rand_distr::Gamma<f64>),
    TruncatedGamma {
        alpha: f64,
        rate: f64,
        yb: f64,
        q_at_bound: f64,
        log_gamma_alpha: f64,
    },
    InverseGaussian(rand_distr::InverseGaussian<f64>),
    Custom(SamplerFn, f64),
}

impl PreparedSampler {
    pub(crate) fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        match self {
            PreparedSampler::Normal(d) => d.sample(rng),
            PreparedSampler::TruncatedNormal {
                mu,
                sigma,
                bound,
                p_below,
            } => {
                let u: f64 = rng.sample(Open01);
                let x = mu + sigma * std_normal_quantile(u * p_below);
                if x < *bound {
                    x
                } else {
                    // quantile rounding pushed the draw onto the bound
                    bound - sigma * 1e-15
                }
            }
            PreparedSampler::Gamma(d) => d.sample(rng),
            PreparedSampler::TruncatedGamma {
                alpha,
                rate,
                yb,
                q_at_bound,
                log_gamma_alpha,
            } => {
                let u: f64 = rng.sample(Open01);
                let y = invert_upper_gamma_tail(*alpha, *yb, u * q_at_bound, *log_gamma_alpha);
                (y / rate).max(*yb / rate * (1.0 + 1e-16))
            }
            PreparedSampler::InverseGaussian(d) => d.sample(rng),
            PreparedSampler::Custom(f, theta) => f(*theta, rng),
        }
    }
}

/// Solves Q(alpha, y) = target for y >= yb via safeguarded Newton
/// (the one-sided numerical inversion used by the truncated-gamma sampler).
fn invert_upper_gamma_tail(alpha: f64, yb: f64, target: f64, log_gamma_alpha: f64) -> f64 {
    debug_assert!(target > 0.0);
    let mut lo = yb;
    let mut hi = (yb + 1.0).max(2.0 * alpha);
    while upper_incomplete_gamma_regularized(alpha, hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..128 {
        let g = upper_incomplete_gamma_regularized(alpha, y) - target;
        if g > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        // dQ/dy = -exp((alpha-1) ln y - y - log Gamma(alpha))
        let log_deriv = (alpha - 1.0) * y.ln() - y - log_gamma_alpha;
        let step = g * f64::exp(-log_deriv);
        let candidate = y + step;
        let next = if candidate > lo && candidate < hi {
            candidate
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 1e-15 * next.abs().max(1.0) {
            return next;
        }
        y = next;
    }
    y
}

/// One row of the model catalog: the grammar key, an example spec string,
/// a short description, and a representative default instance.
pub struct CatalogEntry {
    pub key: &'static str,
    pub grammar: &'static str,
    pub summary: &'static str,
    pub model: ExpFamilyModel,
}

/// Catalog of the built-in families with representative parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            key: "normal",
            grammar: "normal",
            summary: "standard normal location family, theta = mu",
            model: ExpFamilyModel::normal(),
        },
        CatalogEntry {
            key: "normal:sigma",
            grammar: "normal:sigma=<v>",
            summary: "normal with known sigma, theta = mu/sigma^2",
            model: ExpFamilyModel::scaled_normal(2.0).unwrap(),
        },
        CatalogEntry {
            key: "gamma",
            grammar: "gamma:alpha=<v>",
            summary: "gamma with known shape, rate parameter theta' > 0",
            model: ExpFamilyModel::gamma(2.0).unwrap(),
        },
        CatalogEntry {
            key: "gamma:trunc",
            grammar: "gamma:alpha=<v>,trunc_lo=<b>",
            summary: "gamma truncated to (b, inf)",
            model: ExpFamilyModel::truncated_gamma(2.0, 1.0).unwrap(),
        },
        CatalogEntry {
            key: "invgauss",
            grammar: "invgauss:lambda=<v>",
            summary: "inverse Gaussian with known lambda, theta' = lambda/(2 mu^2)",
            model: ExpFamilyModel::inverse_gaussian(1.0).unwrap(),
        },
        CatalogEntry {
            key: "truncnormal",
            grammar: "truncnormal:sigma=<v>,b=<v>",
            summary: "normal truncated to (-inf, b), theta = mu/sigma^2",
            model: ExpFamilyModel::truncated_normal(1.0, 0.0).unwrap(),
        },
    ]
}

/// Parses the CLI model grammar.
pub fn parse_model(spec: &str) -> Result<ExpFamilyModel, ParseError> {
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    let params = match rest {
        Some(r) => kv_pairs(r)?,
        None => Vec::new(),
    };
    let check_keys = |allowed: &[&str]| -> Result<(), ParseError> {
        for (k, _) in &params {
            if !allowed.contains(&k.as_str()) {
                return Err(ParseError::unknown_key(spec, k));
            }
        }
        Ok(())
    };
    let get = |key: &str| -> Option<&str> {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let model = match head {
        "normal" => {
            check_keys(&["sigma"])?;
            let sigma = match get("sigma") {
                Some(v) => parse_positive(spec, "sigma", v)?,
                None => 1.0,
            };
            ExpFamilyModel::scaled_normal(sigma)
        }
        "gamma" => {
            check_keys(&["alpha", "trunc_lo"])?;
            let alpha = parse_positive(
                spec,
                "alpha",
                get("alpha").ok_or_else(|| ParseError::missing_key(spec, "alpha"))?,
            )?;
            match get("trunc_lo") {
                Some(v) => {
                    let b = parse_positive(spec, "trunc_lo", v)?;
                    ExpFamilyModel::truncated_gamma(alpha, b)
                }
                None => ExpFamilyModel::gamma(alpha),
            }
        }
        "invgauss" => {
            check_keys(&["lambda"])?;
            let lambda = parse_positive(
                spec,
                "lambda",
                get("lambda").ok_or_else(|| ParseError::missing_key(spec, "lambda"))?,
            )?;
            ExpFamilyModel::inverse_gaussian(lambda)
        }
        "truncnormal" => {
            check_keys(&["sigma", "b"])?;
            let sigma = parse_positive(
                spec,
                "sigma",
                get("sigma").ok_or_else(|| ParseError::missing_key(spec, "sigma"))?,
            )?;
            let b_str = get("b").ok_or_else(|| ParseError::missing_key(spec, "b"))?;
            let b: f64 = b_str
                .parse()
                .map_err(|_| ParseError::bad_value(spec, "b", b_str))?;
            ExpFamilyModel::truncated_normal(sigma, b)
        }
        other => {
            return Err(ParseError::new(
                spec,
                format!(
                    "unknown model '{other}' (expected normal, gamma, invgauss or truncnormal)"
                ),
            ))
        }
    };
    model.map_err(|e| ParseError::new(spec, e.to_string()))
}
