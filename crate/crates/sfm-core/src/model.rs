//! Composed-error families: parameters, transforms, moments, and samplers.
//!
//! The frontier error is `ε = v − u` with `u ~ Gamma(p, c)` one-sided and `v`
//! either normal (`N(0, σ_v²)`) or symmetric α-stable (`S(α, κ)`, `1 < α ≤ 2`).
//! `λ` is the standardized noise scale: `σ_v²/c²` in the normal case and
//! `(κ/c)^α` in the stable case.

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Exp1, Gamma, Normal, StandardUniform, StudentT};
use serde::{Deserialize, Serialize};

use crate::rng::Rng;
use crate::{SfmError, SfmResult};

/// Parameters of the normal/gamma composed error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalGammaParams {
    /// Variance of the two-sided component `v`.
    pub sigma_v2: f64,
    /// Gamma shape of the inefficiency component `u`.
    pub p: f64,
    /// Gamma scale of `u`.
    pub c: f64,
}

impl NormalGammaParams {
    pub fn new(sigma_v2: f64, p: f64, c: f64) -> SfmResult<Self> {
        if !(sigma_v2 > 0.0) || !(p > 0.0) || !(c > 0.0) {
            return Err(SfmError::InvalidParameter(format!(
                "normal/gamma requires sigma_v2, p, c > 0; got ({sigma_v2}, {p}, {c})"
            )));
        }
        let out = Self { sigma_v2, p, c };
        if !out.lambda().is_finite() {
            return Err(SfmError::InvalidParameter(format!(
                "lambda = sigma_v2/c^2 not finite for ({sigma_v2}, {c})"
            )));
        }
        Ok(out)
    }

    /// `λ = σ_v² / c²`.
    pub fn lambda(&self) -> f64 {
        self.sigma_v2 / (self.c * self.c)
    }
}

/// Parameters of the stable/gamma composed error, restricted to the
/// finite-mean range `1 < α ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableGammaParams {
    /// Stable scale of `v`.
    pub kappa: f64,
    /// Stable tail index.
    pub alpha: f64,
    /// Gamma shape of `u`.
    pub p: f64,
    /// Gamma scale of `u`.
    pub c: f64,
}

impl StableGammaParams {
    pub fn new(kappa: f64, alpha: f64, p: f64, c: f64) -> SfmResult<Self> {
        if !(kappa > 0.0) || !(p > 0.0) || !(c > 0.0) {
            return Err(SfmError::InvalidParameter(format!(
                "stable/gamma requires kappa, p, c > 0; got ({kappa}, {p}, {c})"
            )));
        }
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(SfmError::InvalidParameter(format!(
                "stable tail index must lie in (1, 2], got {alpha}"
            )));
        }
        let out = Self { kappa, alpha, p, c };
        if !out.lambda().is_finite() {
            return Err(SfmError::InvalidParameter(format!(
                "lambda = (kappa/c)^alpha not finite for ({kappa}, {alpha}, {c})"
            )));
        }
        Ok(out)
    }

    /// `λ = (κ / c)^α`.
    pub fn lambda(&self) -> f64 {
        (self.kappa / self.c).powf(self.alpha)
    }
}

/// Distributional part of a frontier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ErrorsSpec {
    NormalGamma(NormalGammaParams),
    StableGamma(StableGammaParams),
}

impl ErrorsSpec {
    pub fn gamma_shape(&self) -> f64 {
        match self {
            ErrorsSpec::NormalGamma(p) => p.p,
            ErrorsSpec::StableGamma(p) => p.p,
        }
    }

    pub fn gamma_scale(&self) -> f64 {
        match self {
            ErrorsSpec::NormalGamma(p) => p.c,
            ErrorsSpec::StableGamma(p) => p.c,
        }
    }

    /// Mean of the composed error, `−cp`.
    pub fn mean(&self) -> f64 {
        -self.gamma_scale() * self.gamma_shape()
    }
}

/// Direction of the frontier: production (`Y = Xβ + v − u`) or cost, which is
/// mapped to the production form by negating `Y` and `X` at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignConvention {
    Production,
    Cost,
}

/// A fitted or hypothesized frontier model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    /// Coefficients, intercept first when present.
    pub beta: Vec<f64>,
    pub errors: ErrorsSpec,
    pub sign_convention: SignConvention,
}

/// One cross-section: design matrix (row major) and response.
#[derive(Debug, Clone)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
    k: usize,
}

impl Sample {
    /// Build from rows of regressors and the response vector. Requires
    /// `n ≥ k + 1` and numerically full column rank.
    pub fn new(rows: Vec<Vec<f64>>, y: Vec<f64>) -> SfmResult<Self> {
        let n = rows.len();
        if n == 0 || n != y.len() {
            return Err(SfmError::InvalidParameter(format!(
                "design has {n} rows but response has {}",
                y.len()
            )));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(SfmError::InvalidParameter("empty design row".into()));
        }
        let mut x = Vec::with_capacity(n * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(SfmError::InvalidParameter(format!(
                    "row {i} has {} columns, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(SfmError::InvalidParameter(format!("non-finite value in row {i}")));
            }
            x.extend_from_slice(row);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SfmError::InvalidParameter("non-finite response value".into()));
        }
        if n < k + 1 {
            return Err(SfmError::RankDeficient(format!("n = {n} < k + 1 = {}", k + 1)));
        }
        let s = Self { x, y, k };
        s.check_rank()?;
        Ok(s)
    }

    /// Location-only sample (intercept column of ones).
    pub fn location_only(y: Vec<f64>) -> SfmResult<Self> {
        let rows = vec![vec![1.0]; y.len()];
        Self::new(rows, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.k..(i + 1) * self.k]
    }

    /// Replace the response, keeping the design (bootstrap step `Y* = Xβ̂ + ε*`).
    pub fn with_response(&self, y: Vec<f64>) -> SfmResult<Self> {
        if y.len() != self.n() {
            return Err(SfmError::InvalidParameter(format!(
                "replacement response length {} != n = {}",
                y.len(),
                self.n()
            )));
        }
        Ok(Self { x: self.x.clone(), y, k: self.k })
    }

    /// `Xβ` for a coefficient vector.
    pub fn predict(&self, beta: &[f64]) -> SfmResult<Vec<f64>> {
        if beta.len() != self.k {
            return Err(SfmError::InvalidParameter(format!(
                "beta length {} != k = {}",
                beta.len(),
                self.k
            )));
        }
        Ok((0..self.n())
            .map(|i| self.row(i).iter().zip(beta).map(|(x, b)| x * b).sum())
            .collect())
    }

    fn check_rank(&self) -> SfmResult<()> {
        // Cholesky of X'X with relative pivot tolerance.
        let k = self.k;
        let mut xtx = vec![0.0_f64; k * k];
        for i in 0..self.n() {
            let row = self.row(i);
            for a in 0..k {
                for b in a..k {
                    xtx[a * k + b] += row[a] * row[b];
                }
            }
        }
        let scale: f64 = (0..k).map(|a| xtx[a * k + a]).fold(0.0, f64::max);
        let mut l = vec![0.0_f64; k * k];
        for a in 0..k {
            for b in a..k {
                let mut s = xtx[a * k + b];
                for m in 0..a {
                    s -= l[a * k + m] * l[b * k + m];
                }
                if a == b {
                    if s <= 1e-12 * scale.max(1e-300) {
                        return Err(SfmError::RankDeficient(format!(
                            "column {a} numerically dependent (pivot {s:.3e})"
                        )));
                    }
                    l[a * k + a] = s.sqrt();
                } else {
                    l[b * k + a] = s / l[a * k + a];
                }
            }
        }
        Ok(())
    }
}

/// MGF of the normal/gamma composed error, `t ≥ 0`:
/// `exp(σ_v² t²/2) / (1 + ct)^p`.
pub fn mgf_composed(params: &NormalGammaParams, t: f64) -> SfmResult<f64> {
    if 1.0 + params.c * t <= 0.0 {
        return Err(SfmError::InvalidParameter(format!(
            "mgf_composed undefined at t = {t} (1 + ct <= 0)"
        )));
    }
    Ok((0.5 * params.sigma_v2 * t * t).exp() / (1.0 + params.c * t).powf(params.p))
}

/// MGF of the standardized error `ε/c`: `exp(λt²/2) / (1+t)^p`.
pub fn mgf_standardized(lambda: f64, p: f64, t: f64) -> f64 {
    (0.5 * lambda * t * t).exp() / (1.0 + t).powf(p)
}

/// CF of the composed error. Modulus never exceeds one; the stable/gamma CF
/// at `α = 2` coincides with the normal/gamma CF at `σ_v² = 2κ²`.
pub fn cf_composed(errors: &ErrorsSpec, t: f64) -> Complex64 {
    let (v_factor, p, c) = match errors {
        ErrorsSpec::NormalGamma(q) => ((-0.5 * q.sigma_v2 * t * t).exp(), q.p, q.c),
        ErrorsSpec::StableGamma(q) => ((-(q.kappa * t.abs()).powf(q.alpha)).exp(), q.p, q.c),
    };
    // (1 + i c t)^{-p}
    let gamma_factor = Complex64::new(1.0, c * t).powf(-p);
    gamma_factor * v_factor
}

/// First four raw moments of the normal/gamma error plus the standardized
/// fifth moment (the fifth line of the moment display is in `ε/c` units).
pub fn moments_ng(params: &NormalGammaParams) -> (f64, f64, f64, f64, f64) {
    let s2 = params.sigma_v2;
    let p = params.p;
    let c = params.c;
    let lam = params.lambda();
    let mu1 = -c * p;
    let mu2 = s2 + c * c * p * (p + 1.0);
    let mu3 = -c.powi(3) * p * (p + 1.0) * (p + 2.0) - 3.0 * c * p * s2;
    let mu4 = 3.0 * s2 * s2
        + c.powi(4) * p * (p + 1.0) * (p + 2.0) * (p + 3.0)
        + 6.0 * s2 * c * c * p * (p + 1.0);
    let mu5_std = -15.0 * lam * lam * p
        - 10.0 * lam * p * (p + 1.0) * (p + 2.0)
        - p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0);
    (mu1, mu2, mu3, mu4, mu5_std)
}

/// Exact population moments of the standardized error `ε/c`, orders 1..5.
pub fn standardized_moments(params: &NormalGammaParams) -> [f64; 5] {
    let lam = params.lambda();
    let p = params.p;
    let (_, _, _, _, mu5) = moments_ng(params);
    [
        -p,
        lam + p * (p + 1.0),
        -p * (p + 1.0) * (p + 2.0) - 3.0 * lam * p,
        3.0 * lam * lam
            + p * (p + 1.0) * (p + 2.0) * (p + 3.0)
            + 6.0 * lam * p * (p + 1.0),
        mu5,
    ]
}

/// Symmetric α-stable draw with scale `κ`, by the Chambers–Mallows–Stuck
/// transform; at `α = 2` a normal draw with variance `2κ²` avoids the CMS
/// singularity.
pub fn sample_stable(rng: &mut Rng, alpha: f64, kappa: f64) -> f64 {
    if alpha >= 2.0 {
        let n = Normal::new(0.0, (2.0f64).sqrt() * kappa).expect("valid normal");
        return n.sample(rng);
    }
    let theta: f64 = (rng.sample::<f64, _>(StandardUniform) - 0.5) * std::f64::consts::PI;
    let w: f64 = rng.sample(Exp1);
    let a = alpha;
    let x = (a * theta).sin() / theta.cos().powf(1.0 / a)
        * (((a - 1.0) * theta).cos() / w).powf((1.0 - a) / a);
    kappa * x
}

/// Data-generating processes for the Monte Carlo experiments: the two null
/// families plus the simulation alternatives (normal/gamma mixtures and
/// Student-t/gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ErrorGenerator {
    NormalGamma(NormalGammaParams),
    StableGamma(StableGammaParams),
    /// Draw from `a` with probability `weight`, else from `b`.
    Mixture {
        weight: f64,
        a: NormalGammaParams,
        b: NormalGammaParams,
    },
    /// `v` Student-t with `nu` degrees of freedom, `u ~ Gamma(p, c)`.
    StudentTGamma { nu: f64, p: f64, c: f64 },
}

impl ErrorGenerator {
    fn draw_one(&self, rng: &mut Rng) -> f64 {
        match *self {
            ErrorGenerator::NormalGamma(q) => {
                let v = Normal::new(0.0, q.sigma_v2.sqrt()).expect("valid normal").sample(rng);
                let u = Gamma::new(q.p, q.c).expect("valid gamma").sample(rng);
                v - u
            }
            ErrorGenerator::StableGamma(q) => {
                let v = sample_stable(rng, q.alpha, q.kappa);
                let u = Gamma::new(q.p, q.c).expect("valid gamma").sample(rng);
                v - u
            }
            ErrorGenerator::Mixture { weight, a, b } => {
                let pick_a = rng.sample::<f64, _>(StandardUniform) < weight;
                let q = if pick_a { a } else { b };
                ErrorGenerator::NormalGamma(q).draw_one(rng)
            }
            ErrorGenerator::StudentTGamma { nu, p, c } => {
                let v = StudentT::new(nu).expect("valid t").sample(rng);
                let u = Gamma::new(p, c).expect("valid gamma").sample(rng);
                v - u
            }
        }
    }
}

/// `n` i.i.d. composed errors `ε_j = v_j − u_j`; deterministic given the
/// generator state.
pub fn sample_errors(generator: &ErrorGenerator, n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| generator.draw_one(rng)).collect()
}
