//! Standard-normal helpers for the probit choice model.
//!
//! Everything that ends up inside a log-likelihood goes through
//! [`log_norm_cdf`] and [`inv_mills`], which stay finite far into the lower
//! tail. Below `z = -8` both switch to a continued fraction for the Mills
//! ratio `R(x) = (1 - Φ(x)) / φ(x)` instead of dividing two tiny numbers.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

const TAIL_SWITCH: f64 = -8.0;
const CF_DEPTH: usize = 80;

/// `ln(√(2π))`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Mills ratio `(1 - Φ(x)) / φ(x)` for large positive `x`, via the classical
/// continued fraction `1 / (x + 1/(x + 2/(x + 3/(x + ...))))`.
fn mills_ratio_upper(x: f64) -> f64 {
    let mut tail = x;
    for k in (1..=CF_DEPTH).rev() {
        tail = x + k as f64 / tail;
    }
    1.0 / tail
}

/// `ln Φ(z)`, finite for any finite `z`.
pub fn log_norm_cdf(z: f64) -> f64 {
    if z < TAIL_SWITCH {
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio_upper(-z).ln()
    } else if z > 0.0 {
        (-0.5 * erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else {
        norm_cdf(z).ln()
    }
}

/// Inverse Mills ratio `φ(z) / Φ(z)`, the derivative of `ln Φ(z)`.
pub fn inv_mills(z: f64) -> f64 {
    if z < TAIL_SWITCH {
        1.0 / mills_ratio_upper(-z)
    } else {
        norm_pdf(z) / norm_cdf(z)
    }
}

/// First and second derivative of `ln Φ(z)` with respect to `z`.
pub fn log_norm_cdf_derivs(z: f64) -> (f64, f64) {
    let lambda = inv_mills(z);
    (lambda, -lambda * (z + lambda))
}

/// Binary entropy in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    -(p * p.ln() + q * (-p).ln_1p()) / LN_2
}

/// Binary entropy of `Φ(x)` in bits, symmetric in the sign of `x` bit-for-bit.
pub fn entropy_of_cdf_bits(x: f64) -> f64 {
    binary_entropy_bits(norm_cdf(-x.abs()))
}

/// `π ln 2`, the scale of the Gaussian approximation to `h(Φ(·))`.
pub const PI_LN_2: f64 = PI * LN_2;
