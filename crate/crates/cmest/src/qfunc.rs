//! Completely monotone target functions represented through their Laplace
//! density: `q(theta) = int_0^inf f(y) exp(-y theta) dy`.
//!
//! The built-in kinds cover the reciprocal, negative powers, shifted
//! negative powers and indicator windows; arbitrary `f` can be attached
//! through [`QFunction::custom`], with the caller guaranteeing
//! integrability on the stated domain.

use std::fmt;
use std::sync::Arc;

use crate::models::RealFn;
use crate::numerics::special::log_gamma;
use crate::numerics::{integrate_log, QuadResult};
use crate::parse::{kv_pairs, parse_nonneg_or_inf, parse_positive, ParseError};

/// Built-in target kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QKind {
    /// q(theta) = 1/theta, f = 1 on (0, inf).
    Reciprocal,
    /// q(theta) = theta^-k, f(y) = y^(k-1)/Gamma(k).
    Power {
        k: f64,
    },
    /// q(theta) = (b + theta)^-k, f(y) = y^(k-1) e^(-by) / Gamma(k).
    ShiftedPower {
        b: f64,
        k: f64,
    },
    /// q(theta) = (e^(-d1 theta) - e^(-d2 theta))/theta, f = 1 on (d1, d2).
    Window {
        d1: f64,
        d2: f64,
    },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QFuncError {
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    ThetaOutOfDomain {
        theta: f64,
        lo: f64,
        hi: f64,
    },
    QuadratureDidNotConverge {
        achieved_bound: f64,
    },
}

impl fmt::Display for QFuncError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QFuncError::InvalidParameter {
                name,
                value,
                requirement,
            } => write!(
                f,
                "parameter {name} = {value} invalid: must be {requirement}"
            ),
            QFuncError::ThetaOutOfDomain { theta, lo, hi } => {
                write!(
                    f,
                    "theta = {theta} outside the finiteness domain ({lo}, {hi})"
                )
            }
            QFuncError::QuadratureDidNotConverge { achieved_bound } => write!(
                f,
                "Laplace integral did not converge (achieved error bound {achieved_bound:e})"
            ),
        }
    }
}

impl std::error::Error for QFuncError {}

/// A completely monotone target function.
#[derive(Clone)]
pub struct QFunction {
    name: String,
    kind: QKind,
    log_f: RealFn,
    f_support: (f64, f64),
    domain: (f64, f64),
    closed_q: Option<RealFn>,
    nonnegative_f: bool,
}

impl fmt::Debug for QFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QFunction")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("f_support", &self.f_support)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Default absolute tolerance for the Laplace-integral quadrature.
pub const EVAL_Q_TOL: f64 = 1e-10;

fn require(
    cond: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), QFuncError> {
    if cond {
        Ok(())
    } else {
        Err(QFuncError::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}

impl QFunction {
    pub fn reciprocal() -> Self {
        QFunction {
            name: "recip".to_string(),
            kind: QKind::Reciprocal,
            log_f: Arc::new(|_| 0.0),
            f_support: (0.0, f64::INFINITY),
            domain: (0.0, f64::INFINITY),
            closed_q: Some(Arc::new(|t| 1.0 / t)),
            nonnegative_f: true,
        }
    }

    pub fn power(k: f64) -> Result<Self, QFuncError> {
        require(k.is_finite() && k > 0.0, "k", k, "finite and > 0")?;
        let lg = log_gamma(k);
        Ok(QFunction {
            name: format!("power:k={k}"),
            kind: QKind::Power { k },
            log_f: Arc::new(move |y| (k - 1.0) * y.ln() - lg),
            f_support: (0.0, f64::INFINITY),
            domain: (0.0, f64::INFINITY),
            closed_q: Some(Arc::new(move |t| t.powf(-k))),
            nonnegative_f: true,
        })
    }

    pub fn shifted_power(b: f64, k: f64) -> Result<Self, QFuncError> {
        require(k.is_finite() && k > 0.0, "k", k, "finite and > 0")?;
        require(b.is_finite(), "b", b, "finite")?;
        let lg = log_gamma(k);
        Ok(QFunction {
            name: format!("shiftpow:b={b},k={k}"),
            kind: QKind::ShiftedPower { b, k },
            log_f: Arc::new(move |y| (k - 1.0) * y.ln() - b * y - lg),
            f_support: (0.0, f64::INFINITY),
            domain: (-b, f64::INFINITY),
            closed_q: Some(Arc::new(move |t| (b + t).powf(-k))),
            nonnegative_f: true,
        })
    }

    /// Indicator window `f = 1 on (d1, d2)` with `0 <= d1 < d2 <= inf`.
    /// A degenerate window (`d1 == d2`) is rejected: it represents the
    /// zero target.
    pub fn window(d1: f64, d2: f64) -> Result<Self, QFuncError> {
        require(d1.is_finite() && d1 >= 0.0, "d1", d1, "finite and >= 0")?;
        require(d2 > d1, "d2", d2, "strictly greater than d1")?;
        let domain = if d2.is_finite() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (0.0, f64::INFINITY)
        };
        let name = if d2.is_finite() {
            format!("window:d1={d1},d2={d2}")
        } else {
            format!("window:d1={d1},d2=inf")
        };
        Ok(QFunction {
            name,
            kind: QKind::Window { d1, d2 },
            log_f: Arc::new(|_| 0.0),
            f_support: (d1, d2),
            domain,
            closed_q: Some(Arc::new(move |t| window_closed(d1, d2, t))),
            nonnegative_f: true,
        })
    }

    /// A user-supplied Laplace density on `(0, inf)`. `domain` must be the
    /// open interval on which the integral is finite; set `nonnegative_f`
    /// to false for signed densities (complete-monotonicity checks are
    /// skipped for those).
    pub fn custom<F>(
        name: impl Into<String>,
        log_f: F,
        domain: (f64, f64),
        nonnegative_f: bool,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        QFunction {
            name: name.into(),
            kind: QKind::Custom,
            log_f: Arc::new(log_f),
            f_support: (0.0, f64::INFINITY),
            domain,
            closed_q: None,
            nonnegative_f,
        }
    }

    pub fn with_closed_form<F>(mut self, q: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.closed_q = Some(Arc::new(q));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> QKind {
        self.kind
    }

    /// Open interval on which the Laplace kernel vanishes outside.
    pub fn f_support(&self) -> (f64, f64) {
        self.f_support
    }

    /// The finiteness domain C.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_q.is_some()
    }

    pub fn nonnegative_f(&self) -> bool {
        self.nonnegative_f
    }

    pub fn log_f(&self, y: f64) -> f64 {
        let (lo, hi) = self.f_support;
        if y <= lo || y >= hi {
            f64::NEG_INFINITY
        } else {
            (self.log_f)(y)
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<(), QFuncError> {
        let (lo, hi) = self.domain;
        if theta.is_finite() && theta > lo && theta < hi {
            Ok(())
        } else {
            Err(QFuncError::ThetaOutOfDomain { theta, lo, hi })
        }
    }

    /// Evaluates q(theta): closed form when present, quadrature otherwise.
    pub fn eval(&self, theta: f64) -> Result<f64, QFuncError> {
        self.check_theta(theta)?;
        match &self.closed_q {
            Some(q) => Ok(q(theta)),
            None => self.eval_quadrature(theta, EVAL_Q_TOL).map(|r| r.value),
        }
    }

    /// Evaluates q(theta) by adaptive quadrature of the Laplace integral,
    /// splitting at the integrand's scale and using a double-exponential
    /// transform on the tail.
    pub fn eval_quadrature(&self, theta: f64, tol: f64) -> Result<QuadResult, QFuncError> {
        self.check_theta(theta)?;
        let (lo, hi) = self.f_support;
        let integrand = |y: f64| self.log_f(y) - y * theta;
        // split point: the power-kernel peak scale max(1, k / effective rate)
        let rate = match self.kind {
            QKind::ShiftedPower { b, .. } => theta + b,
            _ => theta,
        };
        let k = match self.kind {
            QKind::Power { k } | QKind::ShiftedPower { k, .. } => k,
            _ => 1.0,
        };
        let split = if rate > 0.0 { (k / rate).max(1.0) } else { 1.0 };
        let result = if hi.is_finite() {
            integrate_log(integrand, lo, hi, tol)
        } else {
            let split = split.max(lo + 1.0);
            let head = integrate_log(integrand, lo, split, 0.5 * tol);
            let tail = integrate_log(integrand, split, f64::INFINITY, 0.5 * tol);
            QuadResult {
                value: head.value + tail.value,
                log_abs_value: (head.value + tail.value).ln(),
                abs_error_bound: head.abs_error_bound + tail.abs_error_bound,
                nodes_used: head.nodes_used + tail.nodes_used,
                converged: head.converged && tail.converged,
            }
        };
        if !result.converged {
            return Err(QFuncError::QuadratureDidNotConverge {
                achieved_bound: result.abs_error_bound,
            });
        }
        Ok(result)
    }

    /// Central finite-difference check of the alternating-derivative signs
    /// for m = 1, 2, 3 on the given grid. Differences are left unscaled
    /// (not divided by h^m); the tolerance absorbs roundoff relative to the
    /// local magnitude of q. Returns the offending (theta, m) on failure.
    pub fn check_complete_monotonicity(&self, thetas: &[f64]) -> Result<(), (f64, u32)> {
        if !self.nonnegative_f {
            return Ok(());
        }
        let (lo, hi) = self.domain;
        for &theta in thetas {
            // step small enough to stay inside C and resolve the local scale
            let room = (theta - lo).min(hi - theta);
            let h = (0.05 * theta.abs().max(0.5)).min(if room.is_finite() {
                room / 3.0
            } else {
                f64::INFINITY
            });
            let q = |t: f64| self.eval(t).expect("grid point inside domain");
            let stencil = [
                q(theta - 2.0 * h),
                q(theta - h),
                q(theta),
                q(theta + h),
                q(theta + 2.0 * h),
            ];
            let scale = stencil.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = -1e-6 * scale;
            // (-1)^m Delta^m with central stencils
            let d1 = -(stencil[3] - stencil[1]) / 2.0;
            let d2 = stencil[3] - 2.0 * stencil[2] + stencil[1];
            let d3 = -(stencil[4] - 2.0 * stencil[3] + 2.0 * stencil[1] - stencil[0]) / 2.0;
            for (m, d) in [(1u32, d1), (2, d2), (3, d3)] {
                if d < tol {
                    return Err((theta, m));
                }
            }
        }
        Ok(())
    }
}

/// Closed form of the window target, stable through theta = 0.
fn window_closed(d1: f64, d2: f64, theta: f64) -> f64 {
    if d2.is_finite() {
        if theta == 0.0 {
            return d2 - d1;
        }
        // e^{-d1 t} (1 - e^{-(d2-d1) t}) / t without cancellation
        f64::exp(-d1 * theta) * (-f64::exp_m1(-(d2 - d1) * theta)) / theta
    } else {
        f64::exp(-d1 * theta) / theta
    }
}

/// Parses the CLI target grammar: `recip`, `power:k=<v>`,
/// `shiftpow:b=<v>,k=<v>`, `window:d1=<v>,d2=<v|inf>`.
pub fn parse_q(spec: &str) -> Result<QFunction, ParseError> {
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    let params = match rest {
        Some(r) => kv_pairs(r)?,
        None => Vec::new(),
    };
    let get = |key: &str| -> Option<&str> {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    };
    let check_keys = |allowed: &[&str]| -> Result<(), ParseError> {
        for (k, _) in &params {
            if !allowed.contains(&k.as_str()) {
                return Err(ParseError::unknown_key(spec, k));
            }
        }
        Ok(())
    };
    let q = match head {
        "recip" => {
            check_keys(&[])?;
            Ok(QFunction::reciprocal())
        }
        "power" => {
            check_keys(&["k"])?;
            let k = parse_positive(
                spec,
                "k",
                get("k").ok_or_else(|| ParseError::missing_key(spec, "k"))?,
            )?;
            QFunction::power(k)
        }
        "shiftpow" => {
            check_keys(&["b", "k"])?;
            let b_str = get("b").ok_or_else(|| ParseError::missing_key(spec, "b"))?;
            let b: f64 = b_str
                .parse()
                .map_err(|_| ParseError::bad_value(spec, "b", b_str))?;
            let k = parse_positive(
                spec,
                "k",
                get("k").ok_or_else(|| ParseError::missing_key(spec, "k"))?,
            )?;
            QFunction::shifted_power(b, k)
        }
        "window" => {
            check_keys(&["d1", "d2"])?;
            let d1 = parse_nonneg_or_inf(
                spec,
                "d1",
                get("d1").ok_or_else(|| ParseError::missing_key(spec, "d1"))?,
            )?;
            let d2 = parse_nonneg_or_inf(
                spec,
                "d2",
                get("d2").ok_or_else(|| ParseError::missing_key(spec, "d2"))?,
            )?;
            QFunction::window(d1, d2)
        }
        other => {
            return Err(ParseError::new(
                spec,
                format!("unknown target '{other}' (expected recip, power, shiftpow or window)"),
            ))
        }
    };
    q.map_err(|e| ParseError::new(spec, e.to_string()))
}

/// The built-in kinds at representative parameters, for catalogs and sweeps.
pub fn builtin_catalog() -> Vec<QFunction> {
    vec![
        QFunction::reciprocal(),
        QFunction::power(0.5).unwrap(),
        QFunction::power(2.0).unwrap(),
        QFunction::shifted_power(1.0, 1.5).unwrap(),
        QFunction::window(0.5, 2.0).unwrap(),
        QFunction::window(0.0, f64::INFINITY).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_point_values() {
        assert_eq!(QFunction::reciprocal().eval(2.0).unwrap(), 0.5);
        assert_eq!(QFunction::power(2.0).unwrap().eval(2.0).unwrap(), 0.25);
        assert_eq!(QFunction::power(0.5).unwrap().eval(4.0).unwrap(), 0.5);
        assert_eq!(
            QFunction::shifted_power(1.0, 1.0)
                .unwrap()
                .eval(0.0)
                .unwrap(),
            1.0
        );
        // window(0, inf) coincides with the reciprocal
        let w = QFunction::window(0.0, f64::INFINITY).unwrap();
        assert!((w.eval(3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn window_value_and_theta_zero() {
        let w = QFunction::window(1.0, 2.0).unwrap();
        // e^-1 - e^-2, frozen from the independent Laplace quadrature oracle
        let want = 0.232544157934829630;
        assert!((w.eval(1.0).unwrap() - want).abs() < 1e-15);
        assert!((w.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
        // near-zero continuity
        assert!((w.eval(1e-12).unwrap() - 1.0).abs() < 1e-11);
        // negative theta is inside C for a finite window
        assert!(w.eval(-2.0).unwrap() > 0.0);
    }

    #[test]
    fn degenerate_window_rejected() {
        assert!(QFunction::window(1.0, 1.0).is_err());
        assert!(QFunction::window(2.0, 1.0).is_err());
        assert!(QFunction::window(-1.0, 1.0).is_err());
        assert!(QFunction::power(0.0).is_err());
        assert!(QFunction::power(-2.0).is_err());
    }

    #[test]
    fn domain_checks() {
        assert!(matches!(
            QFunction::reciprocal().eval(-1.0),
            Err(QFuncError::ThetaOutOfDomain { .. })
        ));
        let sp = QFunction::shifted_power(1.0, 2.0).unwrap();
        assert!(sp.eval(-0.5).is_ok());
        assert!(sp.eval(-1.0).is_err());
        let w = QFunction::window(0.0, f64::INFINITY).unwrap();
        assert!(w.eval(-0.1).is_err());
    }

    #[test]
    fn laplace_quadrature_agrees_with_closed_forms() {
        for q in builtin_catalog() {
            let (lo, hi) = q.domain();
            let grid: Vec<f64> = (0..10)
                .map(|i| {
                    let lo_eff = if lo.is_finite() { lo + 0.25 } else { -1.5 };
                    let hi_eff = if hi.is_finite() { hi } else { lo_eff + 6.0 };
                    lo_eff + (hi_eff - lo_eff) * (i as f64 + 0.5) / 10.0
                })
                .collect();
            for theta in grid {
                let closed = q.eval(theta).unwrap();
                let quad = q.eval_quadrature(theta, 1e-11).unwrap().value;
                assert!(
                    (closed - quad).abs() <= 1e-8 * closed.abs().max(1.0),
                    "{} at theta {theta}: closed {closed}, quad {quad}",
                    q.name()
                );
            }
        }
    }

    #[test]
    fn finite_differences_alternate_in_sign() {
        for q in builtin_catalog() {
            let (lo, _) = q.domain();
            let start = if lo.is_finite() { lo + 0.3 } else { -1.0 };
            let grid: Vec<f64> = (0..10).map(|i| start + 0.35 * i as f64).collect();
            assert!(
                q.check_complete_monotonicity(&grid).is_ok(),
                "{} failed the sign check",
                q.name()
            );
        }
    }

    #[test]
    fn custom_q_signed_f_skips_monotonicity() {
        // f(y) = cos-ish signed kernel; only checking the plumbing here
        let q = QFunction::custom("signed", |y: f64| -y, (0.0, f64::INFINITY), false);
        assert!(q.check_complete_monotonicity(&[0.5, 1.0]).is_ok());
        assert!(!q.has_closed_form());
        // quadrature path: int_0^inf e^{-y} e^{-y t} dy = 1/(1+t)
        let got = q.eval(1.0).unwrap();
        assert!((got - 0.5).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn grammar_round_trips_and_errors() {
        assert_eq!(parse_q("recip").unwrap().name(), "recip");
        assert_eq!(parse_q("power:k=2").unwrap().name(), "power:k=2");
        assert_eq!(
            parse_q("shiftpow:b=0.5,k=1").unwrap().name(),
            "shiftpow:b=0.5,k=1"
        );
        assert_eq!(
            parse_q("window:d1=0,d2=inf").unwrap().name(),
            "window:d1=0,d2=inf"
        );
        assert!(parse_q("power").unwrap_err().to_string().contains('k'));
        assert!(parse_q("window:d1=1,d2=1").is_err());
        assert!(parse_q("power:k=2,junk=1")
            .unwrap_err()
            .to_string()
            .contains("junk"));
        assert!(parse_q("sine").is_err());
    }
}
