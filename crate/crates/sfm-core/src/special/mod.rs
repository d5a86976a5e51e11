//! Special functions used by the closed-form test statistics.
//!
//! The normal/gamma statistic needs the standard normal CDF paired with
//! `exp(x²/4γ)` factors that individually overflow long before their product
//! does; [`erfcx`] carries that product stably through the left tail. The
//! stable/gamma statistic needs the Kummer confluent hypergeometric function
//! and the cosine/sine transform integrals built from it.
//!
//! `erf`/`erfc` are evaluated from the all-positive-term series
//! `erf(x) = (2x/√π) e^{-x²} Σ (2x²)^k / (2k+1)!!` below the crossover and
//! the Laplace continued fraction for `erfcx` above it, giving close to full
//! double precision throughout.

mod hyp1f1;
mod integrals;

pub use hyp1f1::{kummer_1f1, kummer_1f1_scaled};
pub use integrals::{exp_weight_integral, integral_i, integral_j};
pub(crate) use integrals::exp_weight_all;

use crate::{SfmError, SfmResult};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_PI: f64 = 0.5641895835477563; // 1/sqrt(pi)
const CROSSOVER: f64 = 2.0;

/// `erf(x)` by the positive series, for `|x| ≤ CROSSOVER`.
fn erf_series(x: f64) -> f64 {
    let x2 = 2.0 * x * x;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= x2 / (2.0 * f64::from(k) + 1.0);
        sum += term;
        if term <= f64::EPSILON * sum || k > 200 {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * x * (-x * x).exp() * sum
}

/// Laplace continued fraction for `erfcx(z)`, `z ≥ CROSSOVER`.
fn erfcx_cf(z: f64) -> f64 {
    let mut k = 0.0_f64;
    for i in (1..=60).rev() {
        k = (i as f64) * 0.5 / (z + k);
    }
    FRAC_1_SQRT_PI / (z + k)
}

/// Error function, relative error near machine precision.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= CROSSOVER {
        erf_series(x)
    } else {
        1.0 - (-x * x).exp() * erfcx_cf(x)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= CROSSOVER {
        1.0 - erf_series(x)
    } else {
        (-x * x).exp() * erfcx_cf(x)
    }
}

/// Scaled complementary error function `exp(z²) erfc(z)` for `z ≥ 0`.
pub fn erfcx(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z <= CROSSOVER {
        (z * z).exp() * (1.0 - erf_series(z))
    } else {
        erfcx_cf(z)
    }
}

/// Standard normal distribution function, absolute error below 1e-12.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() * FRAC_1_SQRT_PI / SQRT_2
}

/// Log of the standard normal CDF, accurate into the far left tail.
pub fn ln_std_normal_cdf(x: f64) -> f64 {
    if x >= -0.5 {
        std_normal_cdf(x).ln()
    } else {
        // Phi(x) = erfcx(|x|/sqrt2) * exp(-x^2/2) / 2
        (0.5 * erfcx(-x / SQRT_2)).ln() - 0.5 * x * x
    }
}

/// Standard normal quantile, refined by two Newton steps on the CDF.
pub fn std_normal_quantile(p: f64) -> SfmResult<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(SfmError::InvalidParameter(format!(
            "quantile argument {p} outside (0,1)"
        )));
    }
    let mut x = SQRT_2 * statrs::function::erf::erf_inv(2.0 * p - 1.0);
    for _ in 0..2 {
        let err = std_normal_cdf(x) - p;
        let d = std_normal_pdf(x);
        if d > 0.0 {
            x -= err / d;
        }
    }
    Ok(x)
}

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> SfmResult<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(SfmError::InvalidParameter(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Gamma function for any non-pole real argument, by reflection for x < 0.
pub(crate) fn gamma_signed(x: f64) -> SfmResult<f64> {
    if x > 0.0 {
        return Ok(statrs::function::gamma::gamma(x));
    }
    if x == x.floor() {
        return Err(SfmError::InvalidParameter(format!(
            "gamma pole at non-positive integer {x}"
        )));
    }
    // Gamma(x) = pi / (sin(pi x) Gamma(1 - x))
    Ok(std::f64::consts::PI
        / ((std::f64::consts::PI * x).sin() * statrs::function::gamma::gamma(1.0 - x)))
}
