//! Standard normal density and tail functions.

use crate::error::{Error, Result};

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gaussian tail `Q(t) = P(Z > t)` for `Z ~ N(0, 1)`.
///
/// Evaluated through `erfc`, which keeps full relative precision deep into
/// the upper tail; the lower tail uses `1 - Q(-t)` only where it cannot
/// cancel.
pub fn q_function(t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("Q is evaluated at non-finite argument {t}")));
    }
    Ok(q(t))
}

/// Unchecked `Q`, for hot loops whose arguments are finite or infinite by
/// construction. `q(+inf) = 0`, `q(-inf) = 1`.
#[inline]
pub fn q(t: f64) -> f64 {
    0.5 * libm::erfc(t * FRAC_1_SQRT_2)
}

/// Standard normal CDF.
#[inline]
pub fn phi_cdf(t: f64) -> f64 {
    q(-t)
}

/// Standard normal density.
#[inline]
pub fn phi_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / SQRT_2PI
}

/// `P(a < Z < b)` for `a <= b`, computed on whichever side of zero avoids
/// subtracting two numbers close to one.
#[inline]
pub fn normal_interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        q(a) - q(b)
    } else if b <= 0.0 {
        q(-b) - q(-a)
    } else {
        1.0 - q(-a) - q(b)
    }
}

/// `ln(exp(a) + exp(b) + ...)` without overflow.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
