//! Closed-form weighted integrals behind both test statistics.
//!
//! `exp_weight_integral(k, x, γ)` evaluates `∫₀^∞ t^k e^{tx} e^{-γt²} dt`
//! for `k ≤ 4`; each order is the x-derivative of the previous one, so all
//! five share the single transcendental factor
//! `A₀ = √(π/γ) Φ(x/√(2γ)) e^{x²/4γ}`. For `x ≤ 0` that product is the
//! stable quantity `½√(π/γ)·erfcx(-x/(2√γ))`; for `x > 0` it grows like
//! `e^{x²/4γ}` and overflow is reported rather than saturated.
//!
//! `integral_i`/`integral_j` are the cosine and sine transforms
//! `∫₀^∞ t^ν cos(tz) e^{-γt²} dt` and `∫₀^∞ t^ν sin(tz) e^{-γt²} dt`,
//! evaluated through ₁F₁ with the `e^{-z²/4γ}` factor folded into the scaled
//! Kummer function.

use super::{erfcx, gamma_signed, kummer_1f1_scaled, std_normal_cdf};
use crate::{SfmError, SfmResult};

const PI: f64 = std::f64::consts::PI;

/// Largest exponent allowed in `e^{x²/4γ}` before signalling overflow.
const MAX_EXPONENT: f64 = 700.0;

/// `A₀(x, γ) = ∫₀^∞ e^{tx} e^{-γt²} dt = √(π/γ) Φ(x/√(2γ)) e^{x²/4γ}`.
fn a0(x: f64, gamma: f64) -> SfmResult<f64> {
    let pref = (PI / gamma).sqrt();
    if x <= 0.0 {
        Ok(pref * 0.5 * erfcx(-x / (2.0 * gamma.sqrt())))
    } else {
        let e = x * x / (4.0 * gamma);
        if e > MAX_EXPONENT {
            return Err(SfmError::Overflow {
                context: "exp_weight_integral",
                exponent: e,
            });
        }
        Ok(pref * std_normal_cdf(x / (2.0 * gamma).sqrt()) * e.exp())
    }
}

/// `∫₀^∞ t^k e^{tx} e^{-γt²} dt` for `k ∈ {0,..,4}`, `γ > 0`.
pub fn exp_weight_integral(k: u8, x: f64, gamma: f64) -> SfmResult<f64> {
    if gamma <= 0.0 || !gamma.is_finite() || !x.is_finite() {
        return Err(SfmError::InvalidParameter(format!(
            "exp_weight_integral domain: x={x}, gamma={gamma}"
        )));
    }
    if k > 4 {
        return Err(SfmError::InvalidParameter(format!(
            "exp_weight_integral order k={k} exceeds 4"
        )));
    }
    let a0 = a0(x, gamma)?;
    let g = gamma;
    Ok(match k {
        0 => a0,
        1 => 0.5 / g + x / (2.0 * g) * a0,
        2 => x / (4.0 * g * g) + (x * x + 2.0 * g) / (4.0 * g * g) * a0,
        3 => {
            (x * x + 4.0 * g) / (8.0 * g * g * g)
                + x * (x * x + 6.0 * g) / (8.0 * g * g * g) * a0
        }
        4 => {
            let g4 = 16.0 * g * g * g * g;
            x * (x * x + 10.0 * g) / g4
                + (x.powi(4) + 12.0 * g * x * x + 12.0 * g * g) / g4 * a0
        }
        _ => unreachable!(),
    })
}

/// All five orders at once; shares the `A₀` evaluation.
pub(crate) fn exp_weight_all(x: f64, gamma: f64) -> SfmResult<[f64; 5]> {
    let a0 = a0(x, gamma)?;
    let g = gamma;
    let g2 = g * g;
    let g3 = g2 * g;
    let g4 = g2 * g2;
    let x2 = x * x;
    Ok([
        a0,
        0.5 / g + x / (2.0 * g) * a0,
        x / (4.0 * g2) + (x2 + 2.0 * g) / (4.0 * g2) * a0,
        (x2 + 4.0 * g) / (8.0 * g3) + x * (x2 + 6.0 * g) / (8.0 * g3) * a0,
        x * (x2 + 10.0 * g) / (16.0 * g4) + (x2 * x2 + 12.0 * g * x2 + 12.0 * g2) / (16.0 * g4) * a0,
    ])
}

/// `I_{ν,γ}(z) = ∫₀^∞ t^ν cos(tz) e^{-γt²} dt`, even in `z`.
///
/// The closed form
/// `Γ((ν+1)/2)/(2γ^{(ν+1)/2}) e^{-z²/4γ} ₁F₁(-ν/2; 1/2; z²/4γ)`
/// is finite for every `ν > -2` except the pole at `ν = -1`; it matches the
/// integral wherever the integral converges (`ν > -1`).
pub fn integral_i(nu: f64, gamma: f64, z: f64) -> SfmResult<f64> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SfmError::InvalidParameter(format!(
            "integral_i gamma={gamma}"
        )));
    }
    if nu <= -2.0 {
        return Err(SfmError::InvalidParameter(format!(
            "integral_i requires nu > -2, got {nu}"
        )));
    }
    let half = 0.5 * (nu + 1.0);
    let w = z * z / (4.0 * gamma);
    let pref = gamma_signed(half)? / (2.0 * gamma.powf(half));
    Ok(pref * kummer_1f1_scaled(-0.5 * nu, 0.5, w)?)
}

/// `J_{ν,γ}(z) = ∫₀^∞ t^ν sin(tz) e^{-γt²} dt`, odd in `z`, zero at `z = 0`.
///
/// Closed form `z/(2γ^{1+ν/2}) Γ(1+ν/2) e^{-z²/4γ} ₁F₁((1-ν)/2; 3/2; z²/4γ)`;
/// the sine factor keeps the integral convergent down to `ν > -2`.
pub fn integral_j(nu: f64, gamma: f64, z: f64) -> SfmResult<f64> {
    if gamma <= 0.0 || !gamma.is_finite() {
        return Err(SfmError::InvalidParameter(format!(
            "integral_j gamma={gamma}"
        )));
    }
    if nu <= -2.0 {
        return Err(SfmError::InvalidParameter(format!(
            "integral_j requires nu > -2, got {nu}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let w = z * z / (4.0 * gamma);
    let pref = z / (2.0 * gamma.powf(1.0 + 0.5 * nu)) * gamma_signed(1.0 + 0.5 * nu)?;
    Ok(pref * kummer_1f1_scaled(0.5 * (1.0 - nu), 1.5, w)?)
}
