//! One-dimensional Lévy-driven Ornstein-Uhlenbeck machinery.
//!
//! A mode `dX = -γX dt + β dZ` has the mild solution
//! `X_t = e^{-γt} X_0 + Y_t` with the stochastic convolution
//! `Y_t = ∫_0^t e^{-γ(t-s)} β dZ_s`, whose characteristic function is
//! `E e^{ihY_t} = exp(-∫_0^t ψ(e^{-γs} β h) ds)`. For symmetric α-stable
//! noise that law is again symmetric stable with a closed-form scale, so
//! stepping is exact; for general symmetric measures the module steps by
//! the large-jump decomposition with exact exponential discounting.

mod cdf;
mod sas;

pub use cdf::{standard_sas_cdf, SasCdf};
pub use sas::{sample_standard_sas, StableLaw};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::levy_measure::{MeasureError, SymmetricLevyMeasure};
use crate::numerics::{self, NumericsError, QuadOptions};

#[derive(Debug, Clone, Error)]
pub enum OuError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("operation requires the stable family")]
    NotStable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// One OU mode: decay rate γ > 0, noise weight β ≥ 0 (β = 0 is the
/// noiseless limit), and the driving jump measure.
#[derive(Debug, Clone)]
pub struct OuParams {
    pub gamma: f64,
    pub beta: f64,
    pub measure: SymmetricLevyMeasure,
}

impl OuParams {
    pub fn new(gamma: f64, beta: f64, measure: SymmetricLevyMeasure) -> Result<Self, OuError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(OuError::InvalidParameter(format!(
                "decay rate must be positive, got {gamma}"
            )));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(OuError::InvalidParameter(format!(
                "noise weight must be nonnegative, got {beta}"
            )));
        }
        Ok(OuParams {
            gamma,
            beta,
            measure,
        })
    }

    fn stable_alpha(&self) -> Option<(f64, f64)> {
        self.measure
            .as_stable()
            .map(|s| (s.alpha(), s.exponent_constant()))
    }

    /// Scale of the stochastic convolution over `[0, t]` in the stable
    /// case: `σ^α = c_α β^α (1 - e^{-αγt})/(αγ)`.
    pub fn convolution_scale(&self, t: f64) -> Result<f64, OuError> {
        let (alpha, c_alpha) = self.stable_alpha().ok_or(OuError::NotStable)?;
        if !(t >= 0.0) {
            return Err(OuError::InvalidParameter(format!(
                "time must be nonnegative, got {t}"
            )));
        }
        let decay = -(-alpha * self.gamma * t).exp_m1(); // 1 - e^{-αγt}
        Ok((c_alpha * self.beta.powf(alpha) * decay / (alpha * self.gamma)).powf(1.0 / alpha))
    }

    /// Scale of the invariant law `∫_0^∞ e^{-γu} β dZ_u`:
    /// `σ^α = c_α β^α/(αγ)`.
    pub fn invariant_scale(&self) -> Result<f64, OuError> {
        let (alpha, c_alpha) = self.stable_alpha().ok_or(OuError::NotStable)?;
        Ok((c_alpha * self.beta.powf(alpha) / (alpha * self.gamma)).powf(1.0 / alpha))
    }

    /// Law of the stochastic convolution at time `t` (stable case).
    pub fn convolution_law(&self, t: f64) -> Result<StableLaw, OuError> {
        let (alpha, _) = self.stable_alpha().ok_or(OuError::NotStable)?;
        Ok(StableLaw::new(alpha, self.convolution_scale(t)?))
    }

    /// Law of the invariant coordinate (stable case).
    pub fn invariant_law(&self) -> Result<StableLaw, OuError> {
        let (alpha, _) = self.stable_alpha().ok_or(OuError::NotStable)?;
        Ok(StableLaw::new(alpha, self.invariant_scale()?))
    }

    /// `E e^{ihY_t} = exp(-∫_0^t ψ(e^{-γs} β h) ds)` by quadrature over s;
    /// real-valued in (0, 1] since the law is symmetric and ψ ≥ 0.
    pub fn cf_convolution(&self, h: f64, t: f64) -> Result<f64, OuError> {
        if !(t >= 0.0) {
            return Err(OuError::InvalidParameter(format!(
                "time must be nonnegative, got {t}"
            )));
        }
        if t == 0.0 || h == 0.0 || self.beta == 0.0 || self.measure.is_zero() {
            return Ok(1.0);
        }
        let f = |s: f64| {
            self.measure
                .char_exponent(((-self.gamma * s).exp()) * self.beta * h)
                .unwrap_or(f64::NAN)
        };
        let r = numerics::integrate_with(f, 0.0, t, &QuadOptions::tolerances(1e-12, 1e-9))?;
        Ok((-r.value).exp())
    }

    /// Exact-in-law step of the mild solution over `h_step` for stable
    /// noise: `e^{-γh} x + (convolution over [0, h])`.
    pub fn step_exact_stable<R: Rng + ?Sized>(
        &self,
        x: f64,
        h_step: f64,
        rng: &mut R,
    ) -> Result<f64, OuError> {
        if !(h_step >= 0.0) {
            return Err(OuError::InvalidParameter(format!(
                "step must be nonnegative, got {h_step}"
            )));
        }
        let law = self.convolution_law(h_step)?;
        Ok((-self.gamma * h_step).exp() * x + law.sample(rng))
    }

    /// General-measure step by the large-jump decomposition: jumps of size
    /// `|y| > cutoff` are Poisson-sampled over the step, sorted in time and
    /// discounted exactly; the drift is integrated exactly. Small jumps are
    /// dropped by default; `gaussian_residual` replaces them by a normal
    /// surrogate with the matching variance `β²ψ₀(cutoff)(1-e^{-2γh})/(2γ)`
    /// (the model itself has no Gaussian part, so this is an approximation
    /// control and callers must flag it in outputs).
    pub fn step_general<R: Rng + ?Sized>(
        &self,
        x: f64,
        h_step: f64,
        cutoff: f64,
        gaussian_residual: bool,
        rng: &mut R,
    ) -> Result<f64, OuError> {
        if !(h_step >= 0.0) {
            return Err(OuError::InvalidParameter(format!(
                "step must be nonnegative, got {h_step}"
            )));
        }
        let decayed = (-self.gamma * h_step).exp() * x;
        if h_step == 0.0 || self.beta == 0.0 || self.measure.is_zero() {
            return Ok(decayed);
        }
        let mut jumps = self.measure.sample_jumps(cutoff, h_step, rng)?;
        jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut value = decayed;
        for j in &jumps {
            value += (-self.gamma * (h_step - j.time)).exp() * self.beta * j.size;
        }
        if gaussian_residual {
            let variance = self.beta
                * self.beta
                * self.measure.truncated_variance(cutoff)?
                * (-(-2.0 * self.gamma * h_step).exp_m1())
                / (2.0 * self.gamma);
            let z: f64 = StandardNormal.sample(rng);
            value += variance.sqrt() * z;
        }
        Ok(value)
    }

    /// Draw from the invariant law: exact for stable noise; otherwise one
    /// long general step from 0 over a horizon `T*` with `e^{-γT*} ≤ 1e-6`,
    /// so the missing remote past sits below the noise floor of any
    /// sampling statistic at desk scale.
    pub fn sample_invariant<R: Rng + ?Sized>(
        &self,
        cutoff: f64,
        gaussian_residual: bool,
        rng: &mut R,
    ) -> Result<f64, OuError> {
        if let Ok(law) = self.invariant_law() {
            return Ok(law.sample(rng));
        }
        let horizon = 6.0 * std::f64::consts::LN_10 / self.gamma;
        self.step_general(0.0, horizon, cutoff, gaussian_residual, rng)
    }
}
