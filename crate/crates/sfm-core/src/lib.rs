//! Goodness-of-fit testing and estimation for stochastic frontier models.
//!
//! The library covers two composed-error families for the frontier model
//! `Y = Xβ + ε`, `ε = v − u` with `u ≥ 0`:
//!
//! * normal/gamma: `v ~ N(0, σ_v²)`, `u ~ Gamma(p, c)`, tested through the
//!   moment generating function ([`mgf_test`]);
//! * stable/gamma: `v` symmetric α-stable with `1 < α ≤ 2`, `u ~ Gamma(p, c)`,
//!   tested through the characteristic function ([`cf_test`]).
//!
//! Both statistics are weighted `L²` distances between an empirical transform
//! and the differential equation its population counterpart satisfies, with
//! weight `exp(−γt²)`. They evaluate in closed form via the special functions
//! in [`special`], and each has an adaptive-quadrature twin that serves as an
//! independent numerical oracle.
//!
//! Estimation ([`estimation`]) provides corrected least squares (cumulant
//! matching on OLS residuals) and maximum likelihood with the density obtained
//! by FFT inversion of the characteristic function. Inference ([`resampling`])
//! provides single-dataset parametric-bootstrap p-values and the warp-speed
//! Monte Carlo harness used for size/power experiments. Firm-level efficiency
//! scores are in [`efficiency`].

pub mod efficiency;
pub mod error;
pub mod estimation;
pub mod mgf_test;
pub mod model;
pub mod quad;
pub mod resampling;
pub mod rng;
pub mod special;
pub mod sum;

pub use error::{SfmError, SfmResult};
pub use model::{
    ErrorGenerator, ErrorsSpec, NormalGammaParams, RegressionModel, Sample, SignConvention,
    StableGammaParams,
};
