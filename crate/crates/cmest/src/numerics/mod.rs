//! Shared numerical primitives: special functions and adaptive
//! double-exponential quadrature.

pub mod quad;
pub mod special;

pub use quad::{integrate_log, integrate_log_nodes, Node, QuadResult, MAX_NODES};
pub use special::{
    erf, erfc, erfcx, log_gamma, log_mills_ratio, log_std_normal_cdf, log_std_normal_pdf,
    log_std_normal_sf, log_upper_incomplete_gamma_regularized, lower_incomplete_gamma_regularized,
    mills_ratio, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf,
    upper_incomplete_gamma_regularized, HALF_LN_TWO_PI,
};
