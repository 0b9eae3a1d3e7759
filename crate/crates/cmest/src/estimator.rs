//! Unbiased estimators of completely monotone targets `q(theta)` for the
//! model catalog: closed forms where they exist, and the generic kernel
//! integral
//!
//! ```text
//!   delta(x) = (1/h(x)) * int h(s) f(|s - x|) ds
//! ```
//!
//! taken from `x` toward the support endpoint (truncation bound included),
//! for everything else. Integrals run in log space throughout: the
//! estimator divides by `h(x)`, which underflows long before the estimate
//! itself stops being representable.

use std::fmt;

use crate::models::{ExpFamilyModel, ModelError, ModelKind, Orientation, QuadHint};
use crate::numerics::special::{
    log_gamma, log_mills_ratio, log_std_normal_pdf, mills_ratio, std_normal_pdf, std_normal_sf,
};
use crate::numerics::{integrate_log, integrate_log_nodes, Node, QuadResult};
use crate::qfunc::{QFuncError, QFunction, QKind};

/// Default absolute tolerance for estimator integrals.
pub const ESTIMATE_TOL: f64 = 1e-10;

/// How an estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm(ClosedFormTag),
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ClosedForm(tag) => write!(f, "closed({tag})"),
            Method::Quadrature => write!(f, "quadrature"),
        }
    }
}

/// The catalog fast paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormTag {
    /// sigma * Mills(z): normal family, k = 1 targets (any shift/tilt).
    NormalMills,
    /// sigma^2 (1 - z Mills(z)): normal family, k = 2 targets.
    NormalPowerTwo,
    /// sigma (SF(zT) - SF(zb)) / phi(zT): truncated normal, k = 1.
    TruncatedNormalMills,
    /// x / alpha.
    GammaLinear,
    /// x/alpha - b^alpha / (alpha x^(alpha-1)).
    TruncatedGammaLinear,
    /// sqrt(8 pi x^3 / lambda) e^(lambda/2x) SF(sqrt(lambda/x)).
    InverseGaussianChi,
}

impl fmt::Display for ClosedFormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClosedFormTag::NormalMills => "normal-mills",
            ClosedFormTag::NormalPowerTwo => "normal-shiftpow-k2",
            ClosedFormTag::TruncatedNormalMills => "truncnormal-mills",
            ClosedFormTag::GammaLinear => "gamma-linear",
            ClosedFormTag::TruncatedGammaLinear => "truncgamma-linear",
            ClosedFormTag::InverseGaussianChi => "invgauss-chi1",
        };
        f.write_str(s)
    }
}

/// A point estimate with its provenance.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    /// The estimate; `+inf` when the true value exceeds `f64::MAX`.
    pub value: f64,
    /// Natural log of the estimate (`-inf` for an exact zero).
    pub log_abs_value: f64,
    pub method: Method,
    /// Absolute error bound reported by the quadrature, when that path ran.
    pub quadrature_error_bound: Option<f64>,
    /// Whether the value was assembled by exponentiating log-space parts.
    pub from_log_parts: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorError {
    Model(ModelError),
    Target(QFuncError),
    WrongOrientation {
        expected: Orientation,
    },
    NotTruncated,
    QuadratureDidNotConverge {
        achieved_bound: f64,
    },
    EmptySample {
        which: &'static str,
    },
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::Model(e) => write!(f, "{e}"),
            EstimatorError::Target(e) => write!(f, "{e}"),
            EstimatorError::WrongOrientation { expected } => {
                write!(f, "operation requires a {expected:?} model")
            }
            EstimatorError::NotTruncated => write!(f, "operation requires a truncated model"),
            EstimatorError::QuadratureDidNotConverge { achieved_bound } => write!(
                f,
                "estimator integral did not converge (achieved bound {achieved_bound:e})"
            ),
            EstimatorError::EmptySample { which } => write!(f, "empty sample: {which}"),
            EstimatorError::InvalidParameter {
                name,
                value,
                requirement,
            } => write!(
                f,
                "parameter {name} = {value} invalid: must be {requirement}"
            ),
        }
    }
}

impl std::error::Error for EstimatorError {}

impl From<ModelError> for EstimatorError {
    fn from(e: ModelError) -> Self {
        EstimatorError::Model(e)
    }
}

impl From<QFuncError> for EstimatorError {
    fn from(e: QFuncError) -> Self {
        EstimatorError::Target(e)
    }
}

/// A (model, target, location-shift) triple resolved to an evaluation plan.
#[derive(Clone)]
pub struct EstimatorSpec {
    model: ExpFamilyModel,
    q: QFunction,
    theta0: f64,
    tol: f64,
    force_quadrature: bool,
}

impl fmt::Debug for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EstimatorSpec")
            .field("model", &self.model.name())
            .field("q", &self.q.name())
            .field("theta0", &self.theta0)
            .field("method", &self.method())
            .finish()
    }
}

impl EstimatorSpec {
    pub fn new(model: ExpFamilyModel, q: QFunction) -> Self {
        EstimatorSpec {
            model,
            q,
            theta0: 0.0,
            tol: ESTIMATE_TOL,
            force_quadrature: false,
        }
    }

    /// Re-tilts the base density by `exp(sign * x * theta0)`; the estimator
    /// then targets `q(theta - theta0)` in the model's own parametrization.
    pub fn with_location_shift(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Disables the closed-form dispatch (cross-validation flag).
    pub fn force_quadrature(mut self, force: bool) -> Self {
        self.force_quadrature = force;
        self
    }

    pub fn model(&self) -> &ExpFamilyModel {
        &self.model
    }

    pub fn q(&self) -> &QFunction {
        &self.q
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// The estimand at a given model parameter: `q(theta - theta0)`.
    pub fn target(&self, theta: f64) -> Result<f64, EstimatorError> {
        self.model.check_theta(theta)?;
        Ok(self.q.eval(theta - self.theta0)?)
    }

    /// Chain of structural transforms relating this spec to the base form.
    pub fn transform_id(&self) -> String {
        let mut parts = Vec::new();
        if self.model.support().orientation == Orientation::UpperUnbounded {
            parts.push("sign_flip".to_string());
        }
        if let Some(b) = self.model.support().truncation {
            parts.push(format!("truncation(b={b})"));
        }
        if self.theta0 != 0.0 {
            parts.push(format!("location_shift({})", self.theta0));
        }
        if parts.is_empty() {
            "identity".to_string()
        } else {
            parts.join("+")
        }
    }

    /// The shifted-power order (c, k) when the target is of that family.
    fn power_form(&self) -> Option<(f64, f64)> {
        match self.q.kind() {
            QKind::Reciprocal => Some((0.0, 1.0)),
            QKind::Power { k } => Some((0.0, k)),
            QKind::ShiftedPower { b, k } => Some((b, k)),
            _ => None,
        }
    }

    /// The closed form this spec resolves to, if any.
    pub fn closed_form(&self) -> Option<ClosedFormTag> {
        let (c, k) = self.power_form()?;
        match self.model.kind() {
            ModelKind::Normal { .. } => {
                if k == 1.0 {
                    Some(ClosedFormTag::NormalMills)
                } else if k == 2.0 {
                    Some(ClosedFormTag::NormalPowerTwo)
                } else {
                    None
                }
            }
            ModelKind::TruncatedNormal { .. } => {
                if k == 1.0 {
                    Some(ClosedFormTag::TruncatedNormalMills)
                } else {
                    None
                }
            }
            ModelKind::Gamma { .. } if k == 1.0 && c == 0.0 && self.theta0 == 0.0 => {
                Some(ClosedFormTag::GammaLinear)
            }
            ModelKind::TruncatedGamma { .. } if k == 1.0 && c == 0.0 && self.theta0 == 0.0 => {
                Some(ClosedFormTag::TruncatedGammaLinear)
            }
            ModelKind::InverseGaussian { .. } if k == 1.0 && c == 0.0 && self.theta0 == 0.0 => {
                Some(ClosedFormTag::InverseGaussianChi)
            }
            _ => None,
        }
    }

    /// The method `estimate` will take.
    pub fn method(&self) -> Method {
        if self.force_quadrature {
            Method::Quadrature
        } else {
            self.closed_form()
                .map(Method::ClosedForm)
                .unwrap_or(Method::Quadrature)
        }
    }

    /// Evaluates the estimator at an observed point.
    pub fn estimate(&self, x: f64) -> Result<Estimate, EstimatorError> {
        self.model.check_support(x)?;
        if !self.force_quadrature {
            if let Some(tag) = self.closed_form() {
                return Ok(self.closed_value(tag, x));
            }
        }
        self.quadrature_estimate(x)
    }

    /// Evaluates by the generic kernel integral regardless of fast paths.
    pub fn estimate_quadrature(&self, x: f64) -> Result<Estimate, EstimatorError> {
        self.model.check_support(x)?;
        self.quadrature_estimate(x)
    }

    fn closed_value(&self, tag: ClosedFormTag, x: f64) -> Estimate {
        let est = |value: f64, log: f64, from_log: bool| Estimate {
            value,
            log_abs_value: log,
            method: Method::ClosedForm(tag),
            quadrature_error_bound: None,
            from_log_parts: from_log,
        };
        match tag {
            ClosedFormTag::NormalMills => {
                let sigma = match self.model.kind() {
                    ModelKind::Normal { sigma } => sigma,
                    _ => unreachable!(),
                };
                let z = self.normal_z(x, sigma);
                let log = sigma.ln() + log_mills_ratio(z);
                est(sigma * mills_ratio(z), log, false)
            }
            ClosedFormTag::NormalPowerTwo => {
                let sigma = match self.model.kind() {
                    ModelKind::Normal { sigma } => sigma,
                    _ => unreachable!(),
                };
                let z = self.normal_z(x, sigma);
                let log = 2.0 * sigma.ln() + log_one_minus_z_mills(z);
                est(f64::exp(log), log, false)
            }
            ClosedFormTag::TruncatedNormalMills => {
                let (sigma, bound) = match self.model.kind() {
                    ModelKind::TruncatedNormal { sigma, bound } => (sigma, bound),
                    _ => unreachable!(),
                };
                let zt = self.normal_z(x, sigma);
                let zb = self.normal_z(bound, sigma);
                // survival difference formed on the smaller-tail side
                let diff = if zb <= 0.0 {
                    std_normal_sf(-zb) - std_normal_sf(-zt)
                } else {
                    std_normal_sf(zt) - std_normal_sf(zb)
                };
                let log = sigma.ln() + diff.ln() - log_std_normal_pdf(zt);
                let pdf = std_normal_pdf(zt);
                let value = if pdf > 0.0 {
                    sigma * diff / pdf
                } else {
                    f64::exp(log)
                };
                est(value, log, false)
            }
            ClosedFormTag::GammaLinear => {
                let alpha = match self.model.kind() {
                    ModelKind::Gamma { alpha } => alpha,
                    _ => unreachable!(),
                };
                est(x / alpha, (x / alpha).ln(), false)
            }
            ClosedFormTag::TruncatedGammaLinear => {
                let (alpha, bound) = match self.model.kind() {
                    ModelKind::TruncatedGamma { alpha, bound } => (alpha, bound),
                    _ => unreachable!(),
                };
                // x/alpha - b^alpha/(alpha x^(alpha-1)) = (x/alpha)(1 - (b/x)^alpha)
                let value = (x / alpha) * (1.0 - (bound / x).powf(alpha));
                est(value, value.ln(), false)
            }
            ClosedFormTag::InverseGaussianChi => {
                let lambda = match self.model.kind() {
                    ModelKind::InverseGaussian { lambda } => lambda,
                    _ => unreachable!(),
                };
                let log =
                    0.5 * (4.0 * x * x * x / lambda).ln() + log_mills_ratio((lambda / x).sqrt());
                est(f64::exp(log), log, true)
            }
        }
    }

    /// Standardized argument of the normal-family closed forms,
    /// z = x/sigma - sigma*theta0 + sigma*c.
    fn normal_z(&self, x: f64, sigma: f64) -> f64 {
        let (c, _) = self
            .power_form()
            .expect("normal fast path requires a power target");
        x / sigma - sigma * self.theta0 + sigma * c
    }

    fn quadrature_estimate(&self, x: f64) -> Result<Estimate, EstimatorError> {
        let sign = self.model.natural_sign();
        let endpoint = self.model.support().integration_endpoint();
        let reach = match self.model.support().orientation {
            Orientation::LowerUnbounded => endpoint - x,
            Orientation::UpperUnbounded => x - endpoint,
        };
        let (f_lo, f_hi) = self.q.f_support();
        let u_hi = f_hi.min(reach);
        if u_hi <= f_lo {
            // the kernel window lies beyond the support endpoint
            return Ok(Estimate {
                value: 0.0,
                log_abs_value: f64::NEG_INFINITY,
                method: Method::Quadrature,
                quadrature_error_bound: Some(0.0),
                from_log_parts: true,
            });
        }
        let log_h_x = self.model.log_h(x) + sign * self.theta0 * x;
        // Integrate in the original variable s, reading the kernel argument
        // u = |s - x| off the node's exact endpoint distance: the kernel and
        // the base density may both be endpoint-singular, and recomputing
        // u or s by subtraction would lose every significant digit there.
        // Power kernels with k < 1 additionally get the v = u^k
        // substitution, which removes the algebraic singularity at u = 0
        // identically instead of asking the node map to resolve it.
        let singular_k = match self.power_form() {
            Some((_, k)) if k < 1.0 => Some(k),
            _ => None,
        };
        let r = match self.model.quad_hint() {
            QuadHint::InverseArgument { lambda } if singular_k.is_none() => {
                // t = lambda/s turns the IG kernel into a chi-square(1) shape
                debug_assert_eq!(sign, -1.0);
                let t_lo = lambda / (x - f_lo);
                let t_hi = if u_hi >= x {
                    f64::INFINITY
                } else {
                    lambda / (x - u_hi)
                };
                let constant = -0.5 * lambda.ln() - log_h_x;
                let theta0 = self.theta0;
                let integrand = |n: Node| {
                    let t = n.x;
                    let s = lambda / t;
                    // u - f_lo = (x - f_lo)(t - t_lo)/t, exact near t_lo
                    let u = if n.dist_lo.is_finite() {
                        f_lo + (x - f_lo) * n.dist_lo / t
                    } else {
                        x - s
                    };
                    constant - 0.5 * t.ln() - 0.5 * t + sign * theta0 * s + self.q.log_f(u)
                };
                integrate_log_nodes(integrand, t_lo, t_hi, self.tol)
            }
            _ => match self.model.support().orientation {
                Orientation::LowerUnbounded => {
                    self.direct_lower(x, f_lo, f_hi, reach, endpoint, log_h_x, singular_k)
                }
                Orientation::UpperUnbounded => {
                    self.direct_upper(x, f_lo, f_hi, reach, endpoint, log_h_x, singular_k)
                }
            },
        };
        if !r.converged {
            return Err(EstimatorError::QuadratureDidNotConverge {
                achieved_bound: r.abs_error_bound,
            });
        }
        Ok(Estimate {
            value: r.value,
            log_abs_value: r.log_abs_value,
            method: Method::Quadrature,
            quadrature_error_bound: Some(r.abs_error_bound),
            from_log_parts: true,
        })
    }

    /// Lower-orientation kernel integral over s in (x + f_lo, x + u_hi).
    #[allow(clippy::too_many_arguments)]
    fn direct_lower(
        &self,
        x: f64,
        f_lo: f64,
        f_hi: f64,
        reach: f64,
        endpoint: f64,
        log_h_x: f64,
        singular_k: Option<f64>,
    ) -> QuadResult {
        let sign = self.model.natural_sign();
        let s_hi = if f_hi < reach { x + f_hi } else { endpoint };
        let kernel = |s: f64, u: f64| {
            self.model.log_h(s) + sign * self.theta0 * s - log_h_x + self.q.log_f(u)
        };
        // v = u^k substitution for a singular power kernel: the u^(k-1)
        // factor cancels against the Jacobian, leaving a smooth integrand
        let vsub = |u_span: f64, tol: f64| -> QuadResult {
            let (b, k) = self.power_form().expect("power target");
            let constant = -log_gamma(k) - k.ln() - log_h_x;
            let integrand = |n: Node| {
                let u = n.x.powf(1.0 / k);
                let s = x + u;
                self.model.log_h(s) + sign * self.theta0 * s - b * u + constant
            };
            integrate_log_nodes(integrand, 0.0, u_span.powf(k), tol)
        };
        match singular_k {
            Some(_) if s_hi.is_finite() => vsub(s_hi - x, self.tol),
            Some(_) => {
                let cut = 4.0 * self.probe_scale(|u| kernel(x + u, u));
                let head = vsub(cut, 0.5 * self.tol);
                let tail = integrate_log_nodes(
                    |n: Node| kernel(n.x, cut + n.dist_lo),
                    x + cut,
                    f64::INFINITY,
                    0.5 * self.tol,
                );
                combine_pieces(head, tail)
            }
            None if s_hi.is_finite() => integrate_log_nodes(
                |n: Node| kernel(n.x, f_lo + n.dist_lo),
                x + f_lo,
                s_hi,
                self.tol,
            ),
            None => {
                // unbounded reach: probe for the kernel's scale and split
                // there, so the finite piece absorbs a singular endpoint and
                // the tail piece the decay
                let cut = 4.0 * self.probe_scale(|u| kernel(x + f_lo + u, f_lo + u));
                let split = x + f_lo + cut;
                let head = integrate_log_nodes(
                    |n: Node| kernel(n.x, f_lo + n.dist_lo),
                    x + f_lo,
                    split,
                    0.5 * self.tol,
                );
                let tail = integrate_log_nodes(
                    |n: Node| kernel(n.x, f_lo + cut + n.dist_lo),
                    split,
                    f64::INFINITY,
                    0.5 * self.tol,
                );
                combine_pieces(head, tail)
            }
        }
    }

    /// Upper-orientation kernel integral over s in (x - u_hi, x - f_lo).
    /// The support endpoint is used verbatim when the kernel reaches it, so
    /// an endpoint-singular h(s) is sampled at exact distances.
    #[allow(clippy::too_many_arguments)]
    fn direct_upper(
        &self,
        x: f64,
        f_lo: f64,
        f_hi: f64,
        reach: f64,
        endpoint: f64,
        log_h_x: f64,
        singular_k: Option<f64>,
    ) -> QuadResult {
        let sign = self.model.natural_sign();
        let kernel = |s: f64, u: f64| {
            self.model.log_h(s) + sign * self.theta0 * s - log_h_x + self.q.log_f(u)
        };
        match singular_k {
            Some(k) => {
                // both ends can be singular (h at the endpoint, the kernel at
                // u = 0): give each half its own variable
                let u_mid = 0.5 * f_hi.min(reach);
                let (b, _) = self.power_form().expect("power target");
                let constant = -log_gamma(k) - k.ln() - log_h_x;
                let near = integrate_log_nodes(
                    |n: Node| {
                        let u = n.x.powf(1.0 / k);
                        let s = x - u;
                        self.model.log_h(s) + sign * self.theta0 * s - b * u + constant
                    },
                    0.0,
                    u_mid.powf(k),
                    0.5 * self.tol,
                );
                let far = integrate_log_nodes(
                    |n: Node| kernel(n.x, u_mid + n.dist_hi),
                    if f_hi < reach { x - f_hi } else { endpoint },
                    x - u_mid,
                    0.5 * self.tol,
                );
                combine_pieces(near, far)
            }
            None => {
                let s_lo = if f_hi < reach { x - f_hi } else { endpoint };
                integrate_log_nodes(
                    |n: Node| kernel(n.x, f_lo + n.dist_hi),
                    s_lo,
                    x - f_lo,
                    self.tol,
                )
            }
        }
    }

    /// Doubling probe for the scale of a kernel peak on (0, inf).
    fn probe_scale<F: Fn(f64) -> f64>(&self, log_kernel: F) -> f64 {
        let mut u_peak = 0.25;
        let mut best = f64::NEG_INFINITY;
        let mut u = 0.25;
        while u <= 64.0 {
            let v = log_kernel(u);
            if v > best {
                best = v;
                u_peak = u;
            }
            u *= 2.0;
        }
        u_peak
    }

    /// Nested-quadrature expectation of the estimator under `f_theta`:
    /// the deterministic unbiasedness identity `E[delta(X)] = q(theta)`.
    pub fn expectation_by_quadrature(
        &self,
        theta: f64,
        outer_tol: f64,
    ) -> Result<QuadResult, EstimatorError> {
        self.model.check_theta(theta)?;
        let (lo, hi) = self.model.support().interval();
        let integrand = |x: f64| {
            let delta = match self.estimate_quadrature(x) {
                Ok(e) => e.log_abs_value,
                Err(_) => f64::NEG_INFINITY,
            };
            match self.model.log_density(theta, x) {
                Ok(ld) => delta + ld,
                Err(_) => f64::NEG_INFINITY,
            }
        };
        Ok(integrate_log(integrand, lo, hi, outer_tol))
    }
}

/// Merges the two pieces of a split kernel integral.
fn combine_pieces(head: QuadResult, tail: QuadResult) -> QuadResult {
    let log_abs_value = if head.log_abs_value == f64::NEG_INFINITY {
        tail.log_abs_value
    } else if tail.log_abs_value == f64::NEG_INFINITY {
        head.log_abs_value
    } else {
        let m = head.log_abs_value.max(tail.log_abs_value);
        m + f64::ln_1p(f64::exp(-(head.log_abs_value - tail.log_abs_value).abs()))
    };
    QuadResult {
        value: head.value + tail.value,
        log_abs_value,
        abs_error_bound: head.abs_error_bound + tail.abs_error_bound,
        nodes_used: head.nodes_used + tail.nodes_used,
        converged: head.converged && tail.converged,
    }
}

/// log(1 - z * Mills(z)), the k = 2 normal closed form, stable on both tails.
fn log_one_minus_z_mills(z: f64) -> f64 {
    if z <= -1.0 {
        // 1 + |z| Mills(z): both terms positive, assemble in log space
        let lm = log_mills_ratio(z);
        let lzm = lm + (-z).ln();
        lzm + f64::ln_1p(f64::exp(-lzm))
    } else {
        f64::ln_1p(-z * mills_ratio(z))
    }
}

/// The generic estimator for a lower-unbounded (natural orientation) model.
pub fn estimate_generic(
    model: &ExpFamilyModel,
    q: &QFunction,
    x: f64,
) -> Result<Estimate, EstimatorError> {
    if model.support().orientation != Orientation::LowerUnbounded {
        return Err(EstimatorError::WrongOrientation {
            expected: Orientation::LowerUnbounded,
        });
    }
    EstimatorSpec::new(model.clone(), q.clone()).estimate(x)
}

/// The location-shifted reciprocal estimator, unbiased for
/// `1/(theta - theta0)`.
pub fn estimate_location(
    model: &ExpFamilyModel,
    x: f64,
    theta0: f64,
) -> Result<Estimate, EstimatorError> {
    EstimatorSpec::new(model.clone(), QFunction::reciprocal())
        .with_location_shift(theta0)
        .estimate(x)
}

/// The sign-flipped estimator for rate-parametrized models on `(a', inf)`;
/// reduces to `F_0(x)/f_0(x)` when the target is the reciprocal.
pub fn estimate_signflip(
    model: &ExpFamilyModel,
    q: &QFunction,
    x: f64,
) -> Result<Estimate, EstimatorError> {
    if model.support().orientation != Orientation::UpperUnbounded {
        return Err(EstimatorError::WrongOrientation {
            expected: Orientation::UpperUnbounded,
        });
    }
    EstimatorSpec::new(model.clone(), q.clone()).estimate(x)
}

/// The estimator for truncated models: the generic integral with the
/// truncation bound as its endpoint.
pub fn estimate_truncated(
    model: &ExpFamilyModel,
    q: &QFunction,
    x: f64,
) -> Result<Estimate, EstimatorError> {
    if model.support().truncation.is_none() {
        return Err(EstimatorError::NotTruncated);
    }
    EstimatorSpec::new(model.clone(), q.clone()).estimate(x)
}

/// Ratio of two normal means from independent samples with known scales:
/// `(sqrt(n2)/tau2) * mean(z1) * Mills((sqrt(n2)/tau2) * mean(z2))`,
/// unbiased for `mu1/mu2` when `mu2 > 0`.
pub fn estimate_ratio_independent(
    z1: &[f64],
    z2: &[f64],
    tau1: f64,
    tau2: f64,
) -> Result<f64, EstimatorError> {
    if z1.is_empty() {
        return Err(EstimatorError::EmptySample { which: "z1" });
    }
    if z2.is_empty() {
        return Err(EstimatorError::EmptySample { which: "z2" });
    }
    for (name, tau) in [("tau1", tau1), ("tau2", tau2)] {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(EstimatorError::InvalidParameter {
                name,
                value: tau,
                requirement: "finite and > 0",
            });
        }
    }
    let mean1 = z1.iter().sum::<f64>() / z1.len() as f64;
    let mean2 = z2.iter().sum::<f64>() / z2.len() as f64;
    let scale = (z2.len() as f64).sqrt() / tau2;
    if mean1 == 0.0 {
        return Ok(0.0);
    }
    Ok(scale * mean1 * mills_ratio(scale * mean2))
}

/// Ratio of bivariate-normal means with known covariance:
/// `W * Mills(y2/sigma2)/sigma2 + rho * sigma1/sigma2` with
/// `W = y1 - rho (sigma1/sigma2) y2`; unbiased for `mu1/mu2` when `mu2 > 0`.
/// `|rho| = 1` is allowed (degenerate W).
pub fn estimate_ratio_bivariate(
    y1: f64,
    y2: f64,
    sigma1: f64,
    sigma2: f64,
    rho: f64,
) -> Result<f64, EstimatorError> {
    for (name, s) in [("sigma1", sigma1), ("sigma2", sigma2)] {
        if !(s.is_finite() && s > 0.0) {
            return Err(EstimatorError::InvalidParameter {
                name,
                value: s,
                requirement: "finite and > 0",
            });
        }
    }
    if !(rho.is_finite() && rho.abs() <= 1.0) {
        return Err(EstimatorError::InvalidParameter {
            name: "rho",
            value: rho,
            requirement: "in [-1, 1]",
        });
    }
    let ratio_term = rho * sigma1 / sigma2;
    let w = y1 - ratio_term * y2;
    if w == 0.0 {
        return Ok(ratio_term);
    }
    Ok(w * mills_ratio(y2 / sigma2) / sigma2 + ratio_term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Support;
    use proptest::prelude::*;

    const SQRT_HALF_PI: f64 = 1.2533141373155003;

    fn assert_close(got: f64, want: f64, tol: f64) {
        assert!(
            (got - want).abs() <= tol,
            "got {got}, want {want} (diff {:e})",
            (got - want).abs()
        );
    }

    #[test]
    fn normal_reciprocal_values() {
        let m = ExpFamilyModel::normal();
        let q = QFunction::reciprocal();
        let e = estimate_generic(&m, &q, 0.0).unwrap();
        assert_close(e.value, SQRT_HALF_PI, 1e-14);
        assert!(matches!(
            e.method,
            Method::ClosedForm(ClosedFormTag::NormalMills)
        ));
        // frozen from the Mills-ratio oracle (continued fraction + quadrature)
        let e = estimate_generic(&m, &q, 1.0).unwrap();
        assert_close(e.value, 0.655679542418798472, 1e-14);
    }

    #[test]
    fn normal_power_two_at_zero() {
        let m = ExpFamilyModel::normal();
        let q = QFunction::shifted_power(0.0, 2.0).unwrap();
        let e = estimate_generic(&m, &q, 0.0).unwrap();
        assert_close(e.value, 1.0, 1e-14);
        assert!(matches!(
            e.method,
            Method::ClosedForm(ClosedFormTag::NormalPowerTwo)
        ));
        // k = 2 with b = 0 at x = 1: 1 - Mills(1), frozen
        let e = estimate_generic(&m, &q, 1.0).unwrap();
        assert_close(e.value, 0.344320457581201528, 1e-14);
    }

    #[test]
    fn location_shift_reduces_to_plain_mills() {
        let m = ExpFamilyModel::normal();
        // theta0 = -1, x = 0 -> Mills(1)
        let e = estimate_location(&m, 0.0, -1.0).unwrap();
        assert_close(e.value, 0.655679542418798472, 1e-14);
        // at x = theta0 the estimate is Mills(0)
        let e = estimate_location(&m, 0.7, 0.7).unwrap();
        assert_close(e.value, SQRT_HALF_PI, 1e-14);
    }

    #[test]
    fn location_identity_at_zero_shift() {
        let m = ExpFamilyModel::normal();
        let q = QFunction::reciprocal();
        for &x in &[-2.0, 0.0, 0.5, 3.0] {
            let shifted = estimate_location(&m, x, 0.0).unwrap();
            let plain = estimate_generic(&m, &q, x).unwrap();
            assert_eq!(shifted.value, plain.value);
        }
    }

    #[test]
    fn gamma_linear_values() {
        let q = QFunction::reciprocal();
        let g2 = ExpFamilyModel::gamma(2.0).unwrap();
        let e = estimate_signflip(&g2, &q, 3.0).unwrap();
        assert_eq!(e.value, 1.5);
        let g1 = ExpFamilyModel::gamma(1.0).unwrap();
        assert_eq!(estimate_signflip(&g1, &q, 2.0).unwrap().value, 2.0);
    }

    #[test]
    fn truncated_gamma_closed_form() {
        let q = QFunction::reciprocal();
        let m = ExpFamilyModel::truncated_gamma(2.0, 1.0).unwrap();
        let e = estimate_truncated(&m, &q, 2.0).unwrap();
        assert_close(e.value, 0.75, 1e-15);
    }

    #[test]
    fn truncated_normal_closed_form() {
        let q = QFunction::reciprocal();
        let m = ExpFamilyModel::truncated_normal(1.0, 0.0).unwrap();
        // frozen from the quadrature oracle: (SF(-1) - SF(0)) / phi(-1)
        let e = estimate_truncated(&m, &q, -1.0).unwrap();
        assert_close(e.value, 1.41068613464244800, 1e-13);
    }

    #[test]
    fn truncation_empty_interval_limit() {
        let q = QFunction::reciprocal();
        let m = ExpFamilyModel::truncated_normal(1.0, 0.0).unwrap();
        let e = estimate_truncated(&m, &q, -1e-9).unwrap();
        assert!(e.value >= 0.0 && e.value < 1e-6, "value {}", e.value);
    }

    #[test]
    fn inverse_gaussian_closed_form() {
        let q = QFunction::reciprocal();
        let m = ExpFamilyModel::inverse_gaussian(1.0).unwrap();
        // frozen from the chi-square substitution quadrature oracle
        let e = estimate_signflip(&m, &q, 1.0).unwrap();
        assert_close(e.value, 1.31135908483759694, 1e-13);
        assert!(e.from_log_parts);
    }

    #[test]
    fn closed_and_quadrature_agree_spot_checks() {
        let cases: Vec<(ExpFamilyModel, QFunction, Vec<f64>)> = vec![
            (
                ExpFamilyModel::normal(),
                QFunction::reciprocal(),
                vec![-3.0, -0.5, 0.0, 1.5, 6.0],
            ),
            (
                ExpFamilyModel::normal(),
                QFunction::shifted_power(0.5, 2.0).unwrap(),
                vec![-2.0, 0.0, 2.0],
            ),
            (
                ExpFamilyModel::gamma(2.5).unwrap(),
                QFunction::reciprocal(),
                vec![0.2, 1.0, 7.0],
            ),
            (
                ExpFamilyModel::truncated_gamma(2.0, 1.0).unwrap(),
                QFunction::reciprocal(),
                vec![1.2, 3.0],
            ),
            (
                ExpFamilyModel::inverse_gaussian(1.0).unwrap(),
                QFunction::reciprocal(),
                vec![0.3, 1.0, 4.0],
            ),
            (
                ExpFamilyModel::truncated_normal(1.0, 0.0).unwrap(),
                QFunction::reciprocal(),
                vec![-2.5, -0.7],
            ),
        ];
        for (m, q, xs) in cases {
            let spec = EstimatorSpec::new(m, q).with_tolerance(1e-12);
            for x in xs {
                let closed = spec.estimate(x).unwrap();
                assert!(matches!(closed.method, Method::ClosedForm(_)));
                let quad = spec.estimate_quadrature(x).unwrap();
                let tol = 1e-8 * closed.value.abs().max(1.0);
                assert!(
                    (closed.value - quad.value).abs() <= tol,
                    "{} {} at x={x}: closed {} vs quad {}",
                    spec.model().name(),
                    spec.q().name(),
                    closed.value,
                    quad.value
                );
            }
        }
    }

    #[test]
    fn signflip_duality_with_reflected_models() {
        // the sign-flipped estimate equals the natural-orientation estimate
        // on the reflected model Y = -X with h~(y) = h(-y)
        let q = QFunction::reciprocal();
        let gamma = ExpFamilyModel::gamma(2.0).unwrap();
        let alpha = 2.0;
        let reflected_gamma = ExpFamilyModel::custom(
            "reflected-gamma",
            Support::lower_unbounded(0.0),
            (0.0, f64::INFINITY),
            move |y: f64| (alpha - 1.0) * (-y).ln(),
            |_t| 0.0,
        )
        .unwrap();
        let lambda = 1.0;
        let ig = ExpFamilyModel::inverse_gaussian(lambda).unwrap();
        let reflected_ig = ExpFamilyModel::custom(
            "reflected-invgauss",
            Support::lower_unbounded(0.0),
            (0.0, f64::INFINITY),
            move |y: f64| -1.5 * (-y).ln() - lambda / (2.0 * -y),
            |_t| 0.0,
        )
        .unwrap();
        for &x in &[0.5, 1.0, 2.5] {
            let a = EstimatorSpec::new(gamma.clone(), q.clone())
                .with_tolerance(1e-12)
                .estimate_quadrature(x)
                .unwrap();
            let b = EstimatorSpec::new(reflected_gamma.clone(), q.clone())
                .with_tolerance(1e-12)
                .estimate(-x)
                .unwrap();
            assert_close(a.value, b.value, 1e-10);
            let a = EstimatorSpec::new(ig.clone(), q.clone())
                .with_tolerance(1e-12)
                .estimate_quadrature(x)
                .unwrap();
            let b = EstimatorSpec::new(reflected_ig.clone(), q.clone())
                .with_tolerance(1e-12)
                .estimate(-x)
                .unwrap();
            assert_close(a.value, b.value, 1e-10);
        }
    }

    #[test]
    fn window_kernel_beyond_endpoint_is_zero() {
        // gamma observation below the window start: empty kernel interval
        let m = ExpFamilyModel::gamma(2.0).unwrap();
        let q = QFunction::window(0.5, 2.0).unwrap();
        let e = estimate_signflip(&m, &q, 0.3).unwrap();
        assert_eq!(e.value, 0.0);
        let e = estimate_signflip(&m, &q, 1.0).unwrap();
        assert!(e.value > 0.0);
    }

    #[test]
    fn orientation_and_truncation_guards() {
        let q = QFunction::reciprocal();
        let g = ExpFamilyModel::gamma(2.0).unwrap();
        let n = ExpFamilyModel::normal();
        assert!(matches!(
            estimate_generic(&g, &q, 1.0),
            Err(EstimatorError::WrongOrientation { .. })
        ));
        assert!(matches!(
            estimate_signflip(&n, &q, 1.0),
            Err(EstimatorError::WrongOrientation { .. })
        ));
        assert!(matches!(
            estimate_truncated(&n, &q, 1.0),
            Err(EstimatorError::NotTruncated)
        ));
        assert!(matches!(
            estimate_signflip(&g, &q, -1.0),
            Err(EstimatorError::Model(ModelError::OutsideSupport { .. }))
        ));
    }

    #[test]
    fn ratio_independent_values() {
        // multiplicative zero
        let v = estimate_ratio_independent(&[0.0, 0.0], &[1.0], 1.0, 1.0).unwrap();
        assert_eq!(v, 0.0);
        // n2 = 1, tau2 = 1, mean(z2) = 0, mean(z1) = 1 -> sqrt(pi/2)
        let v = estimate_ratio_independent(&[1.0], &[0.0], 1.0, 1.0).unwrap();
        assert_close(v, SQRT_HALF_PI, 1e-14);
        assert!(matches!(
            estimate_ratio_independent(&[], &[1.0], 1.0, 1.0),
            Err(EstimatorError::EmptySample { which: "z1" })
        ));
        assert!(estimate_ratio_independent(&[1.0], &[1.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn ratio_bivariate_values() {
        // rho = 0 reduces to the independent single-observation form
        let v = estimate_ratio_bivariate(1.3, 0.4, 1.0, 2.0, 0.0).unwrap();
        let independent = 1.3 * mills_ratio(0.4 / 2.0) / 2.0;
        assert_close(v, independent, 1e-15);
        // degenerate W returns exactly rho sigma1/sigma2
        let y2 = 0.8;
        let (s1, s2, rho) = (1.5, 0.5, 0.7);
        let y1 = rho * (s1 / s2) * y2;
        let v = estimate_ratio_bivariate(y1, y2, s1, s2, rho).unwrap();
        assert_eq!(v, rho * s1 / s2);
        assert!(estimate_ratio_bivariate(0.0, 0.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn expectation_identity_smoke() {
        let spec = EstimatorSpec::new(ExpFamilyModel::gamma(2.0).unwrap(), QFunction::reciprocal())
            .with_tolerance(1e-9);
        let r = spec.expectation_by_quadrature(1.0, 1e-8).unwrap();
        assert_close(r.value, 1.0, 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        // nonnegative Laplace density -> nonnegative estimate
        #[test]
        fn estimates_are_nonnegative(
            x in -6.0f64..6.0,
            k in prop::sample::select(vec![0.5f64, 1.0, 2.0, 3.5]),
            c in -0.5f64..1.5,
        ) {
            let m = ExpFamilyModel::normal();
            let q = QFunction::shifted_power(c, k).unwrap();
            let e = EstimatorSpec::new(m, q).estimate(x).unwrap();
            prop_assert!(e.value >= 0.0);
        }

        #[test]
        fn gamma_estimates_are_nonnegative(
            x in 0.05f64..10.0,
            alpha in 0.4f64..5.0,
        ) {
            let m = ExpFamilyModel::gamma(alpha).unwrap();
            let q = QFunction::power(1.7).unwrap();
            let e = EstimatorSpec::new(m, q).estimate(x).unwrap();
            prop_assert!(e.value >= 0.0);
        }
    }
}
