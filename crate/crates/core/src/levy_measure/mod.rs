//! Symmetric one-dimensional Lévy measures and the functionals the
//! membership criteria are built from.
//!
//! Every measure is stored through its one-sided part on (0,∞) and mirrored
//! to the negative axis, so symmetry holds by construction and asymmetric
//! measures are unrepresentable. The key functionals are
//!
//! - the characteristic exponent `ψ(h) = ∫ (1 - cos(hy)) ν(dy)`,
//! - the truncated variance `ψ₀(u) = ∫_{|y|≤u} y² ν(dy)`,
//! - the tail mass `ψ₁(u) = ∫_{|y|>u} ν(dy)`,
//! - the logarithmic tail moment `∫_(1,∞) log(y) ν(dy)` (one-sided, as it
//!   appears in the sufficient condition for the invariant measure).
//!
//! Values are immutable after construction (including the cached stable
//! exponent constant), so all evaluations are thread-safe.

mod exponent;
mod table;

pub use table::{PowerPiece, TableMeasure};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, NumericsError, QuadOptions};
use exponent::DensityTail;

#[derive(Debug, Clone, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("total mass of an infinite-activity measure is infinite (ψ₁ at u = 0)")]
    InfiniteMass,
    #[error("invalid measure parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

/// One jump of the truncated large-jump part of the driving noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Symmetric α-stable one-sided density `y^{-1-α}`, with the exponent
/// constant `c_α = ∫_ℝ (1-cos y)|y|^{-1-α} dy` evaluated by quadrature at
/// construction and cached, so `ψ(h) = c_α |h|^α` afterwards.
#[derive(Debug, Clone)]
pub struct StableMeasure {
    alpha: f64,
    c_alpha: f64,
}

impl StableMeasure {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Cached `c_α` with `ψ(h) = c_α |h|^α`.
    pub fn exponent_constant(&self) -> f64 {
        self.c_alpha
    }
}

#[derive(Debug, Clone)]
pub struct TemperedStableMeasure {
    alpha: f64,
    lambda: f64,
}

impl TemperedStableMeasure {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Finitely many symmetric atom pairs `±y_k` with masses `m_k` each.
#[derive(Debug, Clone)]
pub struct CompoundPoissonMeasure {
    /// (location, mass), sorted by location, locations strictly positive.
    atoms: Vec<(f64, f64)>,
}

impl CompoundPoissonMeasure {
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

#[derive(Debug, Clone)]
pub enum SymmetricLevyMeasure {
    Stable(StableMeasure),
    TemperedStable(TemperedStableMeasure),
    CompoundPoisson(CompoundPoissonMeasure),
    Table(TableMeasure),
}

impl SymmetricLevyMeasure {
    /// Symmetric α-stable measure, `α ∈ (0,2)`.
    pub fn stable(alpha: f64) -> Result<Self, MeasureError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "stable index must lie in (0,2), got {alpha}"
            )));
        }
        let density = move |y: f64| y.powf(-1.0 - alpha);
        let d1 = move |y: f64| -(1.0 + alpha) * y.powf(-2.0 - alpha);
        let d2 = move |y: f64| (1.0 + alpha) * (2.0 + alpha) * y.powf(-3.0 - alpha);
        let tail = move |t: f64| Ok(t.powf(-alpha) / alpha);
        let info = DensityTail {
            density: &density,
            density_d1: &d1,
            density_d2: &d2,
            tail_mass_from: &tail,
            min_tail_start: 1.0,
            breakpoints: vec![1.0],
        };
        let c_alpha = 2.0 * exponent::one_sided_exponent(&info, 1.0, 1e-12)?;
        Ok(SymmetricLevyMeasure::Stable(StableMeasure { alpha, c_alpha }))
    }

    /// Tempered stable measure with one-sided density `e^{-λy} y^{-1-α}`.
    pub fn tempered(alpha: f64, lambda: f64) -> Result<Self, MeasureError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "tempered stable index must lie in (0,2), got {alpha}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(MeasureError::InvalidParameter(format!(
                "tempering rate must be positive, got {lambda}"
            )));
        }
        Ok(SymmetricLevyMeasure::TemperedStable(
            TemperedStableMeasure { alpha, lambda },
        ))
    }

    /// Symmetric compound Poisson measure from one-sided atoms
    /// `(location > 0, mass > 0)`.
    pub fn compound_poisson(mut atoms: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::InvalidParameter(
                "compound Poisson measure needs at least one atom".into(),
            ));
        }
        for &(y, m) in &atoms {
            if !(y > 0.0 && y.is_finite() && m > 0.0 && m.is_finite()) {
                return Err(MeasureError::InvalidParameter(format!(
                    "atom ({y}, {m}) must have positive finite location and mass"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(SymmetricLevyMeasure::CompoundPoisson(
            CompoundPoissonMeasure { atoms },
        ))
    }

    /// Piecewise power-law density; see [`TableMeasure::new`].
    pub fn table(breakpoints: Vec<f64>, pieces: Vec<PowerPiece>) -> Result<Self, MeasureError> {
        Ok(SymmetricLevyMeasure::Table(TableMeasure::new(
            breakpoints,
            pieces,
        )?))
    }

    pub fn as_stable(&self) -> Option<&StableMeasure> {
        match self {
            SymmetricLevyMeasure::Stable(s) => Some(s),
            _ => None,
        }
    }

    /// True for the degenerate zero measure (a `Table` with all coefficients
    /// zero); every functional vanishes and the noise is absent.
    pub fn is_zero(&self) -> bool {
        match self {
            SymmetricLevyMeasure::Table(t) => t.is_zero(),
            _ => false,
        }
    }

    /// Interior points quadratures over the jump-size axis should respect.
    pub fn quad_breakpoints(&self) -> Vec<f64> {
        match self {
            SymmetricLevyMeasure::Stable(_) => vec![1.0],
            SymmetricLevyMeasure::TemperedStable(t) => vec![1.0 / t.lambda, 1.0],
            SymmetricLevyMeasure::CompoundPoisson(cp) => {
                cp.atoms.iter().map(|&(y, _)| y).collect()
            }
            SymmetricLevyMeasure::Table(t) => t.breakpoints().to_vec(),
        }
    }

    /// One-sided density at `y > 0`; `None` for atomic measures.
    pub fn one_sided_density(&self, y: f64) -> Option<f64> {
        match self {
            SymmetricLevyMeasure::Stable(s) => Some(y.powf(-1.0 - s.alpha)),
            SymmetricLevyMeasure::TemperedStable(t) => {
                Some((-t.lambda * y).exp() * y.powf(-1.0 - t.alpha))
            }
            SymmetricLevyMeasure::CompoundPoisson(_) => None,
            SymmetricLevyMeasure::Table(t) => Some(t.density(y)),
        }
    }

    /// Characteristic exponent `ψ(h) = ∫ (1 - cos(hy)) ν(dy)`; even in `h`,
    /// nonnegative, `ψ(0) = 0`.
    pub fn char_exponent(&self, h: f64) -> Result<f64, MeasureError> {
        let h = h.abs();
        if h == 0.0 {
            return Ok(0.0);
        }
        match self {
            SymmetricLevyMeasure::Stable(s) => Ok(s.c_alpha * h.powf(s.alpha)),
            SymmetricLevyMeasure::CompoundPoisson(cp) => Ok(cp
                .atoms
                .iter()
                .map(|&(y, m)| 2.0 * m * (1.0 - (h * y).cos()))
                .sum()),
            _ => self.char_exponent_by_quadrature(h),
        }
    }

    /// `ψ(h)` evaluated by quadrature against the one-sided density,
    /// bypassing cached closed forms. Errors for atomic measures.
    pub fn char_exponent_by_quadrature(&self, h: f64) -> Result<f64, MeasureError> {
        let h = h.abs();
        if h == 0.0 {
            return Ok(0.0);
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        match self {
            SymmetricLevyMeasure::Stable(s) => {
                let alpha = s.alpha;
                let density = move |y: f64| y.powf(-1.0 - alpha);
                let d1 = move |y: f64| -(1.0 + alpha) * y.powf(-2.0 - alpha);
                let d2 = move |y: f64| (1.0 + alpha) * (2.0 + alpha) * y.powf(-3.0 - alpha);
                let tail = move |t: f64| Ok(t.powf(-alpha) / alpha);
                let info = DensityTail {
                    density: &density,
                    density_d1: &d1,
                    density_d2: &d2,
                    tail_mass_from: &tail,
                    min_tail_start: 1.0,
                    breakpoints: vec![1.0],
                };
                Ok(2.0 * exponent::one_sided_exponent(&info, h, 1e-12)?)
            }
            SymmetricLevyMeasure::TemperedStable(t) => {
                let (alpha, lambda) = (t.alpha, t.lambda);
                let density = move |y: f64| (-lambda * y).exp() * y.powf(-1.0 - alpha);
                let d1 = move |y: f64| {
                    -(-lambda * y).exp()
                        * (lambda * y.powf(-1.0 - alpha) + (1.0 + alpha) * y.powf(-2.0 - alpha))
                };
                let d2 = move |y: f64| {
                    (-lambda * y).exp()
                        * (lambda * lambda * y.powf(-1.0 - alpha)
                            + 2.0 * lambda * (1.0 + alpha) * y.powf(-2.0 - alpha)
                            + (1.0 + alpha) * (2.0 + alpha) * y.powf(-3.0 - alpha))
                };
                let tail = move |t0: f64| {
                    let r = numerics::integrate_with(
                        |y: f64| (-lambda * y).exp() * y.powf(-1.0 - alpha),
                        t0,
                        f64::INFINITY,
                        &QuadOptions::tolerances(1e-14, 1e-11),
                    )?;
                    Ok(r.value)
                };
                let info = DensityTail {
                    density: &density,
                    density_d1: &d1,
                    density_d2: &d2,
                    tail_mass_from: &tail,
                    min_tail_start: 1.0,
                    breakpoints: vec![1.0 / lambda, 1.0],
                };
                Ok(2.0 * exponent::one_sided_exponent(&info, h, 1e-12)?)
            }
            SymmetricLevyMeasure::Table(t) => Ok(2.0 * t.one_sided_exponent(h)?),
            SymmetricLevyMeasure::CompoundPoisson(_) => Err(MeasureError::Unsupported(
                "atomic measures have no density to integrate".into(),
            )),
        }
    }

    /// Truncated variance `ψ₀(u) = ∫_{|y|≤u} y² ν(dy)`; nondecreasing,
    /// `ψ₀(0) = 0`. Closed forms for the stable and compound Poisson
    /// families, quadrature otherwise.
    pub fn truncated_variance(&self, u: f64) -> Result<f64, MeasureError> {
        if !(u >= 0.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "truncation level must be nonnegative, got {u}"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        match self {
            SymmetricLevyMeasure::Stable(s) => Ok(2.0 * u.powf(2.0 - s.alpha) / (2.0 - s.alpha)),
            SymmetricLevyMeasure::CompoundPoisson(cp) => Ok(cp
                .atoms
                .iter()
                .filter(|&&(y, _)| y <= u)
                .map(|&(y, m)| 2.0 * m * y * y)
                .sum()),
            SymmetricLevyMeasure::TemperedStable(_) | SymmetricLevyMeasure::Table(_) => {
                self.truncated_variance_by_quadrature(u)
            }
        }
    }

    /// `ψ₀(u)` by direct integration of `y²` against the one-sided density.
    pub fn truncated_variance_by_quadrature(&self, u: f64) -> Result<f64, MeasureError> {
        if u == 0.0 {
            return Ok(0.0);
        }
        match self {
            SymmetricLevyMeasure::CompoundPoisson(_) => Err(MeasureError::Unsupported(
                "atomic measures have no density to integrate".into(),
            )),
            SymmetricLevyMeasure::Table(t) => Ok(2.0 * t.partial_second_moment(u)?),
            _ => {
                // The integrand is integrable but singular at 0; the adaptive
                // rule never samples the endpoint.
                let cap = u.min(1e150);
                let f = |y: f64| y * y * self.one_sided_density(y).unwrap_or(0.0);
                let opts = QuadOptions::tolerances(1e-13, 1e-11)
                    .with_breakpoints(&self.quad_breakpoints());
                let r = numerics::integrate_with(f, 0.0, cap, &opts)?;
                Ok(2.0 * r.value)
            }
        }
    }

    /// Tail mass `ψ₁(u) = ∫_{|y|>u} ν(dy)`; nonincreasing. At `u = 0` this
    /// is the total mass, which is infinite for the infinite-activity
    /// families and an error.
    pub fn tail_mass(&self, u: f64) -> Result<f64, MeasureError> {
        if !(u >= 0.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "truncation level must be nonnegative, got {u}"
            )));
        }
        match self {
            SymmetricLevyMeasure::Stable(s) => {
                if u == 0.0 {
                    Err(MeasureError::InfiniteMass)
                } else {
                    Ok(2.0 * u.powf(-s.alpha) / s.alpha)
                }
            }
            SymmetricLevyMeasure::TemperedStable(_) => {
                if u == 0.0 {
                    Err(MeasureError::InfiniteMass)
                } else {
                    self.tail_mass_by_quadrature(u)
                }
            }
            SymmetricLevyMeasure::CompoundPoisson(cp) => Ok(cp
                .atoms
                .iter()
                .filter(|&&(y, _)| y > u)
                .map(|&(_, m)| 2.0 * m)
                .sum()),
            SymmetricLevyMeasure::Table(t) => {
                if u == 0.0 && !t.head_mass_finite() {
                    Err(MeasureError::InfiniteMass)
                } else {
                    Ok(2.0 * t.tail_mass_from(u)?)
                }
            }
        }
    }

    /// `ψ₁(u)` by direct integration of the one-sided density, in the log
    /// variable `t = ln y` so power tails become exponentially decaying
    /// integrands.
    pub fn tail_mass_by_quadrature(&self, u: f64) -> Result<f64, MeasureError> {
        match self {
            SymmetricLevyMeasure::CompoundPoisson(_) => Err(MeasureError::Unsupported(
                "atomic measures have no density to integrate".into(),
            )),
            SymmetricLevyMeasure::Table(t) => Ok(2.0 * t.tail_mass_from(u)?),
            _ => {
                if u <= 0.0 {
                    return Err(MeasureError::InfiniteMass);
                }
                let f = |t: f64| {
                    let y = t.exp();
                    let d = self.one_sided_density(y).unwrap_or(0.0);
                    if d == 0.0 {
                        0.0
                    } else {
                        y * d
                    }
                };
                let cuts: Vec<f64> = self
                    .quad_breakpoints()
                    .iter()
                    .filter(|&&b| b > u)
                    .map(|&b| b.ln())
                    .collect();
                let opts = QuadOptions::tolerances(1e-14, 1e-11).with_breakpoints(&cuts);
                let r = numerics::integrate_with(f, u.ln(), f64::INFINITY, &opts)?;
                Ok(2.0 * r.value)
            }
        }
    }

    /// Logarithmic tail moment `∫_(1,∞) log(y) ν(dy)`, computed on the
    /// positive side as it appears in the sufficient condition; the measure
    /// carries no mass of the reflected part on (1,∞). Returns `+∞` when the
    /// declared tail makes the integral divergent.
    pub fn log_tail_moment(&self) -> Result<f64, MeasureError> {
        match self {
            SymmetricLevyMeasure::Stable(s) => {
                // ∫_1^∞ log(y) y^{-1-α} dy = 1/α² by parts.
                Ok(1.0 / (s.alpha * s.alpha))
            }
            SymmetricLevyMeasure::TemperedStable(t) => {
                let (alpha, lambda) = (t.alpha, t.lambda);
                let r = numerics::integrate(
                    move |y: f64| y.ln() * (-lambda * y).exp() * y.powf(-1.0 - alpha),
                    1.0,
                    f64::INFINITY,
                    1e-13,
                    1e-11,
                )?;
                Ok(r.value)
            }
            SymmetricLevyMeasure::CompoundPoisson(cp) => Ok(cp
                .atoms
                .iter()
                .filter(|&&(y, _)| y > 1.0)
                .map(|&(y, m)| m * y.ln())
                .sum()),
            SymmetricLevyMeasure::Table(t) => t.log_tail_moment(),
        }
    }

    /// Whether the support of the measure contains 0, i.e. `ν((0,δ)) > 0`
    /// for every `δ > 0`; exact for all four families.
    pub fn supports_zero(&self) -> bool {
        match self {
            SymmetricLevyMeasure::Stable(_) | SymmetricLevyMeasure::TemperedStable(_) => true,
            SymmetricLevyMeasure::CompoundPoisson(_) => false,
            SymmetricLevyMeasure::Table(t) => t.supports_zero(),
        }
    }

    /// Large-jump realization over `[0, horizon]`: a Poisson number of jumps
    /// with mean `horizon · ψ₁(eps)`, sizes i.i.d. from `ν` restricted to
    /// `{|y| > eps}` and normalized, symmetric signs, times i.i.d. uniform.
    pub fn sample_jumps<R: Rng + ?Sized>(
        &self,
        eps: f64,
        horizon: f64,
        rng: &mut R,
    ) -> Result<Vec<Jump>, MeasureError> {
        if !(eps > 0.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "jump cutoff must be positive, got {eps}"
            )));
        }
        if !(horizon > 0.0) {
            return Err(MeasureError::InvalidParameter(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let rate = self.tail_mass(eps)?;
        let mean = rate * horizon;
        if mean == 0.0 {
            return Ok(Vec::new());
        }
        let count = Poisson::new(mean)
            .map_err(|e| MeasureError::InvalidParameter(format!("poisson rate {mean}: {e}")))?
            .sample(rng) as usize;
        let mut jumps = Vec::with_capacity(count);
        for _ in 0..count {
            let magnitude = self.sample_jump_magnitude(eps, rng)?;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            jumps.push(Jump {
                time: rng.random::<f64>() * horizon,
                size: sign * magnitude,
            });
        }
        Ok(jumps)
    }

    /// One-sided jump magnitude conditioned on `{y > eps}`.
    fn sample_jump_magnitude<R: Rng + ?Sized>(
        &self,
        eps: f64,
        rng: &mut R,
    ) -> Result<f64, MeasureError> {
        match self {
            SymmetricLevyMeasure::Stable(s) => {
                // Inverse power-law tail CDF: P(Y > y | Y > eps) = (y/eps)^{-α}.
                let u: f64 = rng.random();
                Ok(eps * (1.0 - u).powf(-1.0 / s.alpha))
            }
            SymmetricLevyMeasure::TemperedStable(t) => {
                // Pareto proposal thinned by the exponential tempering.
                for _ in 0..100_000 {
                    let u: f64 = rng.random();
                    let y = eps * (1.0 - u).powf(-1.0 / t.alpha);
                    let accept = (-t.lambda * (y - eps)).exp();
                    if rng.random::<f64>() < accept {
                        return Ok(y);
                    }
                }
                Err(MeasureError::Unsupported(format!(
                    "tempered-stable rejection sampler stalled at eps = {eps}; \
                     lower the tempering rate or raise the cutoff"
                )))
            }
            SymmetricLevyMeasure::CompoundPoisson(cp) => {
                let live: Vec<(f64, f64)> =
                    cp.atoms.iter().copied().filter(|&(y, _)| y > eps).collect();
                let total: f64 = live.iter().map(|&(_, m)| m).sum();
                let mut target = rng.random::<f64>() * total;
                for &(y, m) in &live {
                    target -= m;
                    if target <= 0.0 {
                        return Ok(y);
                    }
                }
                Ok(live
                    .last()
                    .expect("tail mass positive implies a live atom")
                    .0)
            }
            SymmetricLevyMeasure::Table(t) => t.sample_magnitude(eps, rng),
        }
    }
}

/// Tagged wire format for Lévy measures, as consumed by the CLI config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MeasureConfig {
    Stable {
        alpha: f64,
    },
    Tempered {
        alpha: f64,
        lambda: f64,
    },
    Cp {
        atoms: Vec<(f64, f64)>,
    },
    Table {
        breakpoints: Vec<f64>,
        pieces: Vec<PowerPiece>,
    },
}

impl MeasureConfig {
    pub fn build(&self) -> Result<SymmetricLevyMeasure, MeasureError> {
        match self {
            MeasureConfig::Stable { alpha } => SymmetricLevyMeasure::stable(*alpha),
            MeasureConfig::Tempered { alpha, lambda } => {
                SymmetricLevyMeasure::tempered(*alpha, *lambda)
            }
            MeasureConfig::Cp { atoms } => SymmetricLevyMeasure::compound_poisson(atoms.clone()),
            MeasureConfig::Table {
                breakpoints,
                pieces,
            } => SymmetricLevyMeasure::table(breakpoints.clone(), pieces.clone()),
        }
    }
}

impl From<&SymmetricLevyMeasure> for MeasureConfig {
    fn from(m: &SymmetricLevyMeasure) -> Self {
        match m {
            SymmetricLevyMeasure::Stable(s) => MeasureConfig::Stable { alpha: s.alpha },
            SymmetricLevyMeasure::TemperedStable(t) => MeasureConfig::Tempered {
                alpha: t.alpha,
                lambda: t.lambda,
            },
            SymmetricLevyMeasure::CompoundPoisson(cp) => MeasureConfig::Cp {
                atoms: cp.atoms.clone(),
            },
            SymmetricLevyMeasure::Table(t) => MeasureConfig::Table {
                breakpoints: t.breakpoints().to_vec(),
                pieces: t.pieces().to_vec(),
            },
        }
    }
}
