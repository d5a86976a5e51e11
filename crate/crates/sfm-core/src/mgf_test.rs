//! Goodness-of-fit statistic for the normal/gamma frontier.
//!
//! With standardized residuals `r_j = ε̂_j/ĉ` and estimates `(p̂, λ̂)`, the
//! empirical counterpart of the standardized-MGF differential equation is
//!
//! ```text
//! D_n(t) = (1 + t) M'_n(t) + [p̂ − λ̂ t(1 + t)] M_n(t)
//! ```
//!
//! and the statistic is `T_{n,γ} = n ∫₀^∞ D_n²(t) e^{-γt²} dt`. Expanding
//! `D_n²` over residual pairs reduces the integral to the five exponential
//! weight integrals: for each ordered pair `(j, k)` with `s = r_j + r_k`,
//!
//! ```text
//! ∫ P_jk(t) e^{ts} e^{-γt²} dt,    P_jk(t) = Σ_m a_m(r_j, r_k) t^m
//! ```
//!
//! where the degree-four coefficients come from
//! `(1+t)² r_j r_k + [p̂ − λ̂t(1+t)]² + 2 r_j (1+t)[p̂ − λ̂t(1+t)]`. The summand
//! is not symmetric in `(j, k)`, so both orders are accumulated explicitly;
//! only the kernels `A_m(s)` (symmetric in the pair) are shared.
//!
//! [`statistic_quadrature`] integrates `D_n²` directly and is the oracle the
//! closed form is certified against.

use crate::special::{exp_weight_all, exp_weight_integral};
use crate::sum::{neumaier_sum, par_sum_indexed, Accumulator};
use crate::{quad, SfmError, SfmResult};

/// Smallest tuning parameter accepted; below this the exponential factors in
/// the closed form lose too much precision.
pub const MIN_GAMMA: f64 = 0.25;

/// Standardized residuals with the estimates the statistic needs.
#[derive(Debug, Clone)]
pub struct StandardizedResiduals {
    pub r: Vec<f64>,
    pub p_hat: f64,
    pub lambda_hat: f64,
    pub c_hat: f64,
}

impl StandardizedResiduals {
    pub fn new(r: Vec<f64>, p_hat: f64, lambda_hat: f64, c_hat: f64) -> SfmResult<Self> {
        if r.len() < 2 {
            return Err(SfmError::InvalidParameter(format!(
                "need at least two residuals, got {}",
                r.len()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(SfmError::InvalidParameter("non-finite residual".into()));
        }
        if !(p_hat > 0.0) || !(lambda_hat >= 0.0) || !(c_hat > 0.0) {
            return Err(SfmError::InvalidParameter(format!(
                "estimates out of domain: p={p_hat}, lambda={lambda_hat}, c={c_hat}"
            )));
        }
        Ok(Self { r, p_hat, lambda_hat, c_hat })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
}

/// Outcome of one statistic evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfTestOutcome {
    pub statistic: f64,
    pub gamma: f64,
    pub n: usize,
}

/// Empirical MGF and its derivative at `t`:
/// `M_n(t) = n⁻¹ Σ e^{t r_j}`, `M'_n(t) = n⁻¹ Σ r_j e^{t r_j}`.
pub fn empirical_mgf(r: &[f64], t: f64) -> SfmResult<(f64, f64)> {
    let max_exp = r
        .iter()
        .map(|&rj| t * rj)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_exp > 700.0 {
        return Err(SfmError::Overflow { context: "empirical_mgf", exponent: max_exp });
    }
    let n = r.len() as f64;
    let mut m = Accumulator::new();
    let mut md = Accumulator::new();
    for &rj in r {
        let e = (t * rj).exp();
        m.add(e);
        md.add(rj * e);
    }
    Ok((m.value() / n, md.value() / n))
}

/// `D_n(t) = (1+t) M'_n(t) + [p̂ − λ̂ t(1+t)] M_n(t)`.
pub fn d_n(res: &StandardizedResiduals, t: f64) -> SfmResult<f64> {
    let (m, md) = empirical_mgf(&res.r, t)?;
    Ok((1.0 + t) * md + (res.p_hat - res.lambda_hat * t * (1.0 + t)) * m)
}

/// Pair coefficients of `t^0..t^4` in the integrand polynomial.
#[inline]
fn pair_coeffs(rj: f64, rk: f64, p: f64, lam: f64) -> [f64; 5] {
    [
        rj * rk + p * p + 2.0 * rj * p,
        2.0 * rj * rk - 2.0 * p * lam + 2.0 * rj * (p - lam),
        rj * rk + lam * lam - 2.0 * p * lam - 4.0 * rj * lam,
        2.0 * lam * lam - 2.0 * rj * lam,
        lam * lam,
    ]
}

fn check_gamma(gamma: f64) -> SfmResult<()> {
    if !(gamma >= MIN_GAMMA) || !gamma.is_finite() {
        return Err(SfmError::InvalidParameter(format!(
            "tuning parameter gamma = {gamma} below the minimum {MIN_GAMMA}"
        )));
    }
    Ok(())
}

/// Closed form of `T_{n,γ}` via the exponential weight integrals.
///
/// Kernels `A_m(r_j + r_k)` are computed once per unordered pair; the ordered
/// double sum then runs over cached values with deterministic chunked
/// reduction, so results are bit-identical for any worker count.
pub fn statistic_closed(res: &StandardizedResiduals, gamma: f64) -> SfmResult<MgfTestOutcome> {
    check_gamma(gamma)?;
    let n = res.n();
    let r = &res.r;
    let (p, lam) = (res.p_hat, res.lambda_hat);

    // overflow guard on the largest pair sum
    let rmax = r.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let smax = 2.0 * rmax;
    if smax > 0.0 && smax * smax / (4.0 * gamma) > 700.0 {
        return Err(SfmError::Overflow {
            context: "mgf statistic pair exponent",
            exponent: smax * smax / (4.0 * gamma),
        });
    }

    // kernels per unordered pair, laid out j*n+k
    let mut kernels: Vec<[f64; 5]> = vec![[0.0; 5]; n * n];
    for j in 0..n {
        for k in j..n {
            let a = exp_weight_all(r[j] + r[k], gamma)?;
            kernels[j * n + k] = a;
            kernels[k * n + j] = a;
        }
    }

    let total = par_sum_indexed(n * n, |idx| {
        let j = idx / n;
        let k = idx % n;
        let a = &kernels[idx];
        let co = pair_coeffs(r[j], r[k], p, lam);
        co[0] * a[0] + co[1] * a[1] + co[2] * a[2] + co[3] * a[3] + co[4] * a[4]
    });
    Ok(MgfTestOutcome { statistic: total / n as f64, gamma, n })
}

/// Adaptive-quadrature evaluation of `T_{n,γ} = n ∫₀^∞ D_n² e^{-γt²} dt`;
/// the oracle for [`statistic_closed`].
pub fn statistic_quadrature(
    res: &StandardizedResiduals,
    gamma: f64,
) -> SfmResult<MgfTestOutcome> {
    check_gamma(gamma)?;
    let n = res.n() as f64;
    let rmax = res.r.iter().fold(0.0_f64, |a, &b| a.max(b));
    // upper limit where gamma t^2 - 2 rmax t > 760
    let upper =
        (2.0 * rmax + (4.0 * rmax * rmax + 4.0 * gamma * 760.0).sqrt()) / (2.0 * gamma) + 2.0;
    let integrand = |t: f64| match d_n(res, t) {
        Ok(d) => d * d * (-gamma * t * t).exp(),
        Err(_) => f64::NAN,
    };
    let v = quad::integrate(integrand, 0.0, upper, 1e-10, 1e-250)?;
    if !v.is_finite() {
        return Err(SfmError::Overflow { context: "mgf statistic quadrature", exponent: f64::NAN });
    }
    Ok(MgfTestOutcome { statistic: n * v, gamma, n: res.n() })
}

/// Empirical moment equations `M_{1..5,n}` from the sample moments of the
/// standardized residuals and `(λ̂, p̂)`.
pub fn moment_equations(res: &StandardizedResiduals) -> [f64; 5] {
    let n = res.n() as f64;
    let mut pow: Vec<f64> = vec![1.0; res.n()];
    let mut m = [0.0_f64; 5];
    for mk in m.iter_mut() {
        let mut acc = Accumulator::new();
        for (pw, &rj) in pow.iter_mut().zip(&res.r) {
            *pw *= rj;
            acc.add(*pw);
        }
        *mk = acc.value() / n;
    }
    moment_equations_from_moments(&m, res.p_hat, res.lambda_hat)
}

/// The same equations from externally supplied moments `m̃_1..m̃_5` (used for
/// population-level checks).
pub fn moment_equations_from_moments(m: &[f64; 5], p: f64, lam: f64) -> [f64; 5] {
    [
        m[0] + p,
        m[1] + (p + 1.0) * m[0] - lam,
        m[2] + (p + 2.0) * m[1] - 2.0 * lam * (m[0] + 1.0),
        m[3] + (p + 3.0) * m[2] - 3.0 * lam * (m[1] + 2.0 * m[0]),
        m[4] + (p + 4.0) * m[3] - 4.0 * lam * (m[2] + 3.0 * m[1]),
    ]
}

/// Degree-4 Taylor value `M₁ + tM₂ + t²M₃/2 + t³M₄/6 + t⁴M₅/24` of `D_n`.
pub fn taylor_check(res: &StandardizedResiduals, t: f64) -> f64 {
    let m = moment_equations(res);
    m[0] + t * (m[1] + t * (m[2] / 2.0 + t * (m[3] / 6.0 + t * m[4] / 24.0)))
}

/// `2 γ^{9/2} / Γ(9/2) · T_{n,γ}`, the scaling whose large-γ limit is
/// `n (M_{5,n}/24)²` under COLS residuals.
pub fn gamma_limit_scaled(res: &StandardizedResiduals, gamma: f64) -> SfmResult<f64> {
    let t = statistic_closed(res, gamma)?;
    let gamma_9_2 = statrs::function::gamma::gamma(4.5);
    Ok(2.0 * gamma.powf(4.5) / gamma_9_2 * t.statistic)
}

/// Single ordered-pair contribution, exposed for spot checks against the
/// cached-kernel path.
#[allow(dead_code)]
pub(crate) fn pair_term(rj: f64, rk: f64, p: f64, lam: f64, gamma: f64) -> SfmResult<f64> {
    let co = pair_coeffs(rj, rk, p, lam);
    let mut vals = [0.0_f64; 5];
    for (m, v) in vals.iter_mut().enumerate() {
        *v = exp_weight_integral(m as u8, rj + rk, gamma)?;
    }
    Ok(neumaier_sum(
        &co.iter().zip(&vals).map(|(c, v)| c * v).collect::<Vec<_>>(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn res(r: Vec<f64>, p: f64, lam: f64) -> StandardizedResiduals {
        StandardizedResiduals::new(r, p, lam, 1.0).unwrap()
    }

    #[test]
    fn empirical_mgf_values() {
        let (m, md) = empirical_mgf(&[0.0, 0.0, 0.0], 1.7).unwrap();
        assert_eq!((m, md), (1.0, 0.0));
        let (m, md) = empirical_mgf(&[0.4, -1.1, 2.0], 0.0).unwrap();
        assert_eq!(m, 1.0);
        assert_abs_diff_eq!(md, (0.4 - 1.1 + 2.0) / 3.0, epsilon = 1e-15);
        let (m, md) = empirical_mgf(&[1.0, -1.0], 0.5).unwrap();
        assert_abs_diff_eq!(m, (0.5f64.exp() + (-0.5f64).exp()) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(md, (0.5f64.exp() - (-0.5f64).exp()) / 2.0, epsilon = 1e-14);
        assert!(empirical_mgf(&[100.0], 10.0).is_err());
    }

    #[test]
    fn d_n_values() {
        // zero residuals: D_n(t) = p - lam t (1+t)
        let rr = res(vec![0.0, 0.0], 0.8, 1.3);
        let t = 0.6;
        assert_abs_diff_eq!(
            d_n(&rr, t).unwrap(),
            0.8 - 1.3 * t * (1.0 + t),
            epsilon = 1e-14
        );
        // t = 0 reduces to mean(r) + p
        let rr = res(vec![0.3, -0.9, 0.1], 1.1, 0.7);
        assert_abs_diff_eq!(
            d_n(&rr, 0.0).unwrap(),
            (0.3 - 0.9 + 0.1) / 3.0 + 1.1,
            epsilon = 1e-14
        );
        // hand-composed example
        let rr = res(vec![1.0, -1.0], 1.0, 1.0);
        let m = (0.5f64.exp() + (-0.5f64).exp()) / 2.0;
        let md = (0.5f64.exp() - (-0.5f64).exp()) / 2.0;
        let want = 1.5 * md + (1.0 - 0.75) * m;
        assert_abs_diff_eq!(d_n(&rr, 0.5).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn zero_residual_statistic_matches_quadrature() {
        let rr = res(vec![0.0, 0.0], 1.0, 1.0);
        let closed = statistic_closed(&rr, 1.0).unwrap().statistic;
        let oracle = statistic_quadrature(&rr, 1.0).unwrap().statistic;
        assert!(((closed - oracle) / oracle).abs() < 1e-10);
        assert!(closed > 0.0);
    }

    #[test]
    fn permutation_invariance() {
        let a = res(vec![0.7, -0.2, 1.4, -1.9], 1.2, 0.5);
        let b = res(vec![-1.9, 1.4, -0.2, 0.7], 1.2, 0.5);
        let ta = statistic_closed(&a, 4.0).unwrap().statistic;
        let tb = statistic_closed(&b, 4.0).unwrap().statistic;
        assert!((ta - tb).abs() <= 1e-12 * ta.abs());
    }

    #[test]
    fn small_gamma_refused() {
        let rr = res(vec![0.1, -0.4], 1.0, 1.0);
        assert!(matches!(
            statistic_closed(&rr, 0.2),
            Err(SfmError::InvalidParameter(_))
        ));
        assert!(statistic_closed(&rr, 0.25).is_ok());
    }

    #[test]
    fn statistic_nonnegative() {
        let rr = res(vec![0.25, -1.75, 0.6, 2.2, -0.3], 0.6, 2.0);
        for g in [0.5, 1.0, 4.0, 8.0] {
            let t = statistic_closed(&rr, g).unwrap().statistic;
            assert!(t >= 0.0, "T = {t} at gamma = {g}");
        }
    }

    #[test]
    fn moment_equations_population_zero() {
        // exact population moments substituted for sample moments -> all zero
        let params = crate::model::NormalGammaParams::new(0.9, 1.4, 0.8).unwrap();
        let m = crate::model::standardized_moments(&params);
        let eqs = moment_equations_from_moments(&m, params.p, params.lambda());
        for (k, e) in eqs.iter().enumerate() {
            assert!(e.abs() < 1e-10, "M_{} = {e}", k + 1);
        }
    }

    #[test]
    fn moment_equations_hand_example() {
        let rr = res(vec![1.0, -1.0], 1.0, 1.0);
        let m = moment_equations(&rr);
        // m1 = 0, so M1 = 0 + 1 = 1
        assert_abs_diff_eq!(m[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn taylor_matches_d_n_to_fifth_order() {
        let rr = res(vec![0.31, -0.77, 1.12, -0.44, 0.05], 0.9, 0.6);
        assert_abs_diff_eq!(taylor_check(&rr, 0.0), moment_equations(&rr)[0], epsilon = 1e-15);
        let t = 1e-3;
        let diff = (d_n(&rr, t).unwrap() - taylor_check(&rr, t)).abs();
        assert!(diff < 1e-13, "remainder {diff:e} at t = 1e-3");
        // fifth-order decay of the remainder under halving; t small enough
        // for the expansion but large enough that t^5 clears the f64 noise
        // floor of D_n
        let rem = |t: f64| (d_n(&rr, t).unwrap() - taylor_check(&rr, t)) / t.powi(5);
        let (r1, r2, r3) = (rem(0.08), rem(0.04), rem(0.02));
        assert!((r1 / r2 - 1.0).abs() < 0.25, "ratio r1/r2 = {}", r1 / r2);
        assert!((r2 / r3 - 1.0).abs() < 0.25, "ratio r2/r3 = {}", r2 / r3);
    }

    #[test]
    fn overflow_guard_reports() {
        let rr = res(vec![40.0, -40.0, 41.0], 1.0, 1.0);
        assert!(matches!(
            statistic_closed(&rr, 1.0),
            Err(SfmError::Overflow { .. })
        ));
    }
}
