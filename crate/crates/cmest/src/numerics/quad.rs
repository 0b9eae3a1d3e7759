//! Adaptive double-exponential quadrature over finite, semi-infinite and
//! doubly infinite intervals.
//!
//! The integrand is supplied in log space and the integral is accumulated
//! in a shifted representation `sum * exp(max_log)`, so kernels whose
//! values span hundreds of orders of magnitude (or whose integral itself
//! overflows an f64) are handled without intermediate overflow. The
//! variable changes are the usual tanh-sinh / exp-sinh / sinh-sinh maps,
//! refined by level doubling with node reuse.

/// Outcome of a quadrature call.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    /// The integral of `exp(f_log)`; `+inf` if it exceeds `f64::MAX`.
    pub value: f64,
    /// Natural log of the integral; `-inf` for a zero integral.
    pub log_abs_value: f64,
    /// Absolute error estimate from the last level doubling.
    pub abs_error_bound: f64,
    /// Number of integrand evaluations.
    pub nodes_used: usize,
    /// Whether the absolute-or-relative tolerance was met before the
    /// node cap was reached.
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            log_abs_value: f64::NEG_INFINITY,
            abs_error_bound: 0.0,
            nodes_used: 0,
            converged: true,
        }
    }
}

/// Hard cap on integrand evaluations per call.
pub const MAX_NODES: usize = 1 << 15;

const T_MAX: f64 = 6.8;
const H0: f64 = 0.5;
const MAX_LEVEL: usize = 11;
const NEGLIGIBLE_LOG_GAP: f64 = 70.0;
const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy)]
enum Map {
    /// x = c + d tanh(pi/2 sinh t) on (a, b)
    Finite { a: f64, b: f64 },
    /// x = a + exp(pi/2 sinh t) on (a, inf)
    LowerBounded { a: f64 },
    /// x = b - exp(pi/2 sinh t) on (-inf, b)
    UpperBounded { b: f64 },
    /// x = sinh(pi/2 sinh t) on (-inf, inf)
    Whole,
}

/// A quadrature node: the abscissa plus its exact distances to the interval
/// endpoints. Integrands with endpoint singularities should use the
/// distances, which stay fully precise where `x - endpoint` would cancel.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    /// Distance to the lower endpoint (`+inf` on unbounded sides).
    pub dist_lo: f64,
    /// Distance to the upper endpoint (`+inf` on unbounded sides).
    pub dist_hi: f64,
}

impl Map {
    /// Node and log-weight at abscissa t. Returns None when the node has
    /// collapsed onto an endpoint or left the representable range.
    fn node(&self, t: f64) -> Option<(Node, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let log_cosh_t = FRAC_PI_2 * t.cosh();
        match *self {
            Map::Finite { a, b } => {
                let d = 0.5 * (b - a);
                // distance from the nearer endpoint, stable for large |u|
                let au = u.abs();
                let comp = 2.0 * d / (1.0 + f64::exp(2.0 * au)); // d * (1 - tanh|u|)
                let far = 2.0 * d - comp;
                let (x, dist_lo, dist_hi) = if t >= 0.0 {
                    (b - comp, far, comp)
                } else {
                    (a + comp, comp, far)
                };
                if x <= a || x >= b || comp <= 0.0 {
                    return None;
                }
                // log weight: ln d + ln(pi/2 cosh t) - 2 ln cosh u
                let ln_cosh_u = au + f64::ln_1p(f64::exp(-2.0 * au)) - std::f64::consts::LN_2;
                Some((
                    Node {
                        x,
                        dist_lo,
                        dist_hi,
                    },
                    d.ln() + log_cosh_t.ln() - 2.0 * ln_cosh_u,
                ))
            }
            Map::LowerBounded { a } => {
                if u > 700.0 {
                    return None;
                }
                let e = f64::exp(u);
                let x = a + e;
                if x <= a || !x.is_finite() {
                    return None;
                }
                Some((
                    Node {
                        x,
                        dist_lo: e,
                        dist_hi: f64::INFINITY,
                    },
                    u + log_cosh_t.ln(),
                ))
            }
            Map::UpperBounded { b } => {
                if u > 700.0 {
                    return None;
                }
                let e = f64::exp(u);
                let x = b - e;
                if x >= b || !x.is_finite() {
                    return None;
                }
                Some((
                    Node {
                        x,
                        dist_lo: f64::INFINITY,
                        dist_hi: e,
                    },
                    u + log_cosh_t.ln(),
                ))
            }
            Map::Whole => {
                if u.abs() > 700.0 {
                    return None;
                }
                let x = u.sinh();
                let au = u.abs();
                let ln_cosh_u = au + f64::ln_1p(f64::exp(-2.0 * au)) - std::f64::consts::LN_2;
                Some((
                    Node {
                        x,
                        dist_lo: f64::INFINITY,
                        dist_hi: f64::INFINITY,
                    },
                    ln_cosh_u + log_cosh_t.ln(),
                ))
            }
        }
    }
}

// running sum in shifted form: total = acc * exp(shift)
struct ShiftedSum {
    shift: f64,
    acc: f64,
}

impl ShiftedSum {
    fn new() -> Self {
        ShiftedSum {
            shift: f64::NEG_INFINITY,
            acc: 0.0,
        }
    }

    fn add_log(&mut self, l: f64) {
        if l == f64::NEG_INFINITY {
            return;
        }
        if l <= self.shift {
            self.acc += f64::exp(l - self.shift);
        } else {
            self.acc = self.acc * f64::exp(self.shift - l) + 1.0;
            self.shift = l;
        }
    }

    fn log_total(&self) -> f64 {
        if self.acc <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.shift + self.acc.ln()
        }
    }
}

/// Integrates `exp(f_log)` over `(lo, hi)`; either bound may be infinite.
///
/// Non-finite integrand values (`-inf`, `NaN`) contribute zero, which makes
/// kernels that vanish off their support or at a singular endpoint safe to
/// pass directly. `tol` is an absolute target; a matching relative criterion
/// applies when the integral is large.
pub fn integrate_log<F: Fn(f64) -> f64>(f_log: F, lo: f64, hi: f64, tol: f64) -> QuadResult {
    integrate_log_nodes(|n: Node| f_log(n.x), lo, hi, tol)
}

/// As [`integrate_log`], but the integrand sees the full [`Node`] so it can
/// evaluate endpoint-singular factors from the exact distances.
pub fn integrate_log_nodes<F: Fn(Node) -> f64>(f_log: F, lo: f64, hi: f64, tol: f64) -> QuadResult {
    assert!(tol > 0.0, "tolerance must be positive");
    assert!(!(lo.is_nan() || hi.is_nan()), "bounds must not be NaN");
    if lo >= hi {
        return QuadResult::zero();
    }
    let map = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => Map::Finite { a: lo, b: hi },
        (true, false) => Map::LowerBounded { a: lo },
        (false, true) => Map::UpperBounded { b: hi },
        (false, false) => Map::Whole,
    };

    let mut sum = ShiftedSum::new();
    let mut nodes = 0usize;

    let eval = |t: f64, sum: &mut ShiftedSum, nodes: &mut usize| -> f64 {
        match map.node(t) {
            None => f64::NEG_INFINITY,
            Some((node, log_w)) => {
                *nodes += 1;
                let fl = f_log(node);
                if fl.is_nan() || fl == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                let l = fl + log_w;
                if !l.is_finite() {
                    return f64::NEG_INFINITY;
                }
                sum.add_log(l);
                l
            }
        }
    };

    // level 0: scan outward from t = 0 until terms are negligible
    let mut extent_pos: f64 = 0.0;
    let mut extent_neg: f64 = 0.0;
    eval(0.0, &mut sum, &mut nodes);
    for dir in [1.0f64, -1.0] {
        let mut consecutive_small = 0usize;
        let mut k = 1usize;
        while consecutive_small < 4 && nodes < MAX_NODES {
            let t = dir * (k as f64) * H0;
            if t.abs() > T_MAX {
                break;
            }
            let l = eval(t, &mut sum, &mut nodes);
            if l < sum.shift - NEGLIGIBLE_LOG_GAP {
                consecutive_small += 1;
            } else {
                consecutive_small = 0;
            }
            if dir > 0.0 {
                extent_pos = t;
            } else {
                extent_neg = t;
            }
            k += 1;
        }
    }

    let mut h = H0;
    let mut log_s_prev = sum.log_total() + h.ln();
    let mut rel = f64::INFINITY;
    let mut converged = false;
    let mut level = 0usize;

    while level < MAX_LEVEL && nodes < MAX_NODES {
        level += 1;
        h *= 0.5;
        // new nodes are the odd multiples of the refined step
        let mut k = 1usize;
        loop {
            let t = (k as f64) * h;
            if t > extent_pos + 0.5 * H0 || nodes >= MAX_NODES {
                break;
            }
            eval(t, &mut sum, &mut nodes);
            k += 2;
        }
        let mut k = 1usize;
        loop {
            let t = -((k as f64) * h);
            if t < extent_neg - 0.5 * H0 || nodes >= MAX_NODES {
                break;
            }
            eval(t, &mut sum, &mut nodes);
            k += 2;
        }

        let log_s = sum.log_total() + h.ln();
        if log_s == f64::NEG_INFINITY && log_s_prev == f64::NEG_INFINITY {
            // integrand is identically zero as far as we can see
            let mut r = QuadResult::zero();
            r.nodes_used = nodes;
            return r;
        }
        rel = if log_s == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            (f64::exp(log_s_prev - log_s) - 1.0).abs()
        };
        let log_abs_err = log_s + rel.ln();
        if level >= 2 && (log_abs_err <= tol.ln() || rel <= tol) {
            converged = true;
            log_s_prev = log_s;
            break;
        }
        log_s_prev = log_s;
    }

    let log_value = log_s_prev;
    let value = f64::exp(log_value);
    let abs_error_bound = if rel.is_finite() {
        f64::exp(log_value + rel.ln()).max(value.abs() * 1e-16)
    } else {
        f64::INFINITY
    };
    QuadResult {
        value,
        log_abs_value: log_value,
        abs_error_bound,
        nodes_used: nodes,
        converged,
    }
}
