//! The truncated infinite-dimensional system: simulation of
//! `X_t = e^{tA}x + Z_A(t)` in the first N modes, H-norm membership
//! diagnostics, invariant-measure sampling and convergence, and
//! irreducibility estimation.
//!
//! Membership in H is a tail event no finite truncation can see, so the
//! diagnostics report plateau/growth statistics of the partial norms
//! `S_N = Σ_{n≤N} x_n²` against the certified criterion verdict rather
//! than claiming an almost-sure statement. Quantiles are medians-based
//! because stable coordinates have infinite variance for α < 2.
//!
//! Ensembles are trajectory-parallel: worker `i` owns the ChaCha stream
//! `(master_seed, i)`, and statistics are reduced in index order, so
//! results are bit-identical for a fixed seed regardless of the worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::levy_measure::{MeasureError, SymmetricLevyMeasure};
use crate::model::{ModelError, Spectrum};
use crate::numerics::{ks_distance, wilson_interval, NumericsError};
use crate::ou1d::{standard_sas_cdf, OuError, OuParams};

const Z95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Error)]
pub enum CylError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ou(#[from] OuError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Approximation controls for non-stable stepping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimOptions {
    /// Jump-size cutoff of the large-jump decomposition.
    pub jump_cutoff: f64,
    /// Replace dropped small jumps by a variance-matched normal surrogate.
    /// Off by default: the model has no Gaussian part, so this is an
    /// approximation control that outputs must flag.
    pub gaussian_residual: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            jump_cutoff: 0.01,
            gaussian_residual: false,
        }
    }
}

/// Coordinates of the truncated process at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedState {
    pub time: f64,
    pub coords: Vec<f64>,
}

/// An open ball in H with finitely supported center.
#[derive(Debug, Clone, Serialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialNormQuantiles {
    pub n_modes: usize,
    pub time: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateKs {
    pub coordinate: usize,
    pub time: f64,
    /// One-sample KS distance of the simulated coordinate against the
    /// exact invariant law.
    pub ks: f64,
    /// KS distance between the exact time-t law and the invariant law,
    /// computed from the scale ratio by CDF search (stable case).
    pub analytic_ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitStats {
    pub hits: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    /// Product lower bound from the finite-block split, with the grid point
    /// it was achieved at; `None` when no split produced a positive bound.
    pub lower_bound: Option<SplitLowerBound>,
    /// Whether the support precheck validates the irreducibility theorem's
    /// hypothesis; when false the estimate is reported as estimate only.
    pub theorem_applicable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitLowerBound {
    pub k_split: usize,
    pub epsilon: f64,
    pub value: f64,
}

/// Seeded Monte Carlo ensemble summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub master_seed: u64,
    pub trajectories: usize,
    pub partial_norm_quantiles: Vec<PartialNormQuantiles>,
    pub coordinate_ks: Vec<CoordinateKs>,
    pub hits: Option<HitStats>,
}

impl EnsembleStats {
    fn empty(master_seed: u64, trajectories: usize) -> Self {
        EnsembleStats {
            master_seed,
            trajectories,
            partial_norm_quantiles: Vec::new(),
            coordinate_ks: Vec::new(),
            hits: None,
        }
    }
}

/// Whether the irreducibility theorem applies: the support of the jump
/// measure must contain 0, which makes every coordinate law full.
pub fn support_full_precheck(measure: &SymmetricLevyMeasure) -> bool {
    measure.supports_zero()
}

/// A truncated model: diagonal spectrum, one jump measure shared by all
/// modes, and the approximation controls.
#[derive(Debug, Clone)]
pub struct CylModel {
    pub spectrum: Spectrum,
    pub measure: SymmetricLevyMeasure,
    pub sim: SimOptions,
}

impl CylModel {
    pub fn new(spectrum: Spectrum, measure: SymmetricLevyMeasure, sim: SimOptions) -> Self {
        CylModel {
            spectrum,
            measure,
            sim,
        }
    }

    fn mode_params(&self, n_modes: usize) -> Result<Vec<OuParams>, CylError> {
        (1..=n_modes)
            .map(|n| {
                Ok(OuParams::new(
                    self.spectrum.gamma(n)?,
                    self.spectrum.beta(n)?,
                    self.measure.clone(),
                )?)
            })
            .collect()
    }

    fn advance_coord<R: rand::Rng + ?Sized>(
        &self,
        params: &OuParams,
        x: f64,
        h: f64,
        rng: &mut R,
    ) -> Result<f64, CylError> {
        if params.measure.as_stable().is_some() {
            Ok(params.step_exact_stable(x, h, rng)?)
        } else {
            Ok(params.step_general(
                x,
                h,
                self.sim.jump_cutoff,
                self.sim.gaussian_residual,
                rng,
            )?)
        }
    }

    /// Simulate `X_t` from `x0` (zero-padded to `n_modes`) in one shot;
    /// coordinates are independent and each is exact in law for stable
    /// noise.
    pub fn simulate<R: rand::Rng + ?Sized>(
        &self,
        x0: &[f64],
        t: f64,
        n_modes: usize,
        rng: &mut R,
    ) -> Result<TruncatedState, CylError> {
        if x0.len() > n_modes {
            return Err(CylError::InvalidInput(format!(
                "initial datum has {} coordinates but the truncation is {n_modes}",
                x0.len()
            )));
        }
        if !(t >= 0.0) {
            return Err(CylError::InvalidInput(format!(
                "time must be nonnegative, got {t}"
            )));
        }
        let params = self.mode_params(n_modes)?;
        let mut coords = Vec::with_capacity(n_modes);
        for (n, p) in params.iter().enumerate() {
            let x = x0.get(n).copied().unwrap_or(0.0);
            coords.push(if t == 0.0 {
                x
            } else {
                self.advance_coord(p, x, t, rng)?
            });
        }
        Ok(TruncatedState { time: t, coords })
    }

    /// Advance a state by `h` with fresh noise; time moves to `t + h`.
    pub fn step<R: rand::Rng + ?Sized>(
        &self,
        state: &TruncatedState,
        h: f64,
        rng: &mut R,
    ) -> Result<TruncatedState, CylError> {
        if !(h >= 0.0) {
            return Err(CylError::InvalidInput(format!(
                "step must be nonnegative, got {h}"
            )));
        }
        let params = self.mode_params(state.coords.len())?;
        let mut coords = Vec::with_capacity(state.coords.len());
        for (p, &x) in params.iter().zip(&state.coords) {
            coords.push(if h == 0.0 {
                x
            } else {
                self.advance_coord(p, x, h, rng)?
            });
        }
        Ok(TruncatedState {
            time: state.time + h,
            coords,
        })
    }

    /// One trajectory coordinate matrix per (master seed, trajectory index)
    /// stream, evolved through the increasing `times`; row k holds the
    /// coordinates at `times[k]`.
    fn trajectory_through_times(
        &self,
        params: &[OuParams],
        x0: &[f64],
        times: &[f64],
        master_seed: u64,
        index: u64,
    ) -> Result<Vec<Vec<f64>>, CylError> {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        let mut current: Vec<f64> = (0..params.len())
            .map(|n| x0.get(n).copied().unwrap_or(0.0))
            .collect();
        let mut out = Vec::with_capacity(times.len());
        let mut t_prev = 0.0;
        for &t in times {
            let h = t - t_prev;
            if h > 0.0 {
                for (p, x) in params.iter().zip(current.iter_mut()) {
                    *x = self.advance_coord(p, *x, h, &mut rng)?;
                }
            }
            t_prev = t;
            out.push(current.clone());
        }
        Ok(out)
    }

    /// Parallel ensemble through a time grid: `result[i][k]` is trajectory
    /// i at `times[k]`. Deterministic in (seed, i) regardless of worker
    /// count.
    pub(crate) fn ensemble_through_times(
        &self,
        x0: &[f64],
        times: &[f64],
        n_modes: usize,
        trajectories: usize,
        master_seed: u64,
    ) -> Result<Vec<Vec<Vec<f64>>>, CylError> {
        if trajectories == 0 {
            return Err(CylError::InvalidInput(
                "need at least one trajectory".into(),
            ));
        }
        if x0.len() > n_modes {
            return Err(CylError::InvalidInput(format!(
                "initial datum has {} coordinates but the truncation is {n_modes}",
                x0.len()
            )));
        }
        let mut t_prev = 0.0;
        for &t in times {
            if !(t >= t_prev) {
                return Err(CylError::InvalidInput(
                    "times must be nonnegative and nondecreasing".into(),
                ));
            }
            t_prev = t;
        }
        let params = self.mode_params(n_modes)?;
        (0..trajectories as u64)
            .into_par_iter()
            .map(|i| self.trajectory_through_times(&params, x0, times, master_seed, i))
            .collect()
    }

    /// Quantiles of the partial norms `S_N = Σ_{n≤N} x_n²` at time `t` over
    /// the ensemble, for each N in the increasing `n_grid`.
    pub fn h_norm_profile(
        &self,
        x0: &[f64],
        t: f64,
        n_grid: &[usize],
        trajectories: usize,
        master_seed: u64,
    ) -> Result<EnsembleStats, CylError> {
        if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CylError::InvalidInput(
                "the truncation grid must be nonempty and strictly increasing".into(),
            ));
        }
        if trajectories < 100 {
            return Err(CylError::InvalidInput(format!(
                "partial-norm quantiles need at least 100 trajectories, got {trajectories}"
            )));
        }
        let n_max = *n_grid.last().expect("nonempty");
        let ensemble = self.ensemble_through_times(x0, &[t], n_max, trajectories, master_seed)?;
        let mut stats = EnsembleStats::empty(master_seed, trajectories);
        for &n in n_grid {
            let mut norms: Vec<f64> = ensemble
                .iter()
                .map(|traj| traj[0][..n].iter().map(|x| x * x).sum())
                .collect();
            norms.sort_by(f64::total_cmp);
            stats.partial_norm_quantiles.push(PartialNormQuantiles {
                n_modes: n,
                time: t,
                q25: quantile_sorted(&norms, 0.25),
                q50: quantile_sorted(&norms, 0.50),
                q75: quantile_sorted(&norms, 0.75),
            });
        }
        Ok(stats)
    }

    /// Draw one sample of the invariant coordinates `ξ_n`: exact stable
    /// law per mode, or long-horizon general stepping otherwise.
    pub fn sample_invariant<R: rand::Rng + ?Sized>(
        &self,
        n_modes: usize,
        rng: &mut R,
    ) -> Result<Vec<f64>, CylError> {
        let params = self.mode_params(n_modes)?;
        params
            .iter()
            .map(|p| {
                Ok(p.sample_invariant(self.sim.jump_cutoff, self.sim.gaussian_residual, rng)?)
            })
            .collect()
    }

    /// Ensemble of invariant samples summarized as partial-norm quantiles
    /// over `n_grid`.
    pub fn invariant_profile(
        &self,
        n_grid: &[usize],
        trajectories: usize,
        master_seed: u64,
    ) -> Result<EnsembleStats, CylError> {
        if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CylError::InvalidInput(
                "the truncation grid must be nonempty and strictly increasing".into(),
            ));
        }
        let n_max = *n_grid.last().expect("nonempty");
        let params = self.mode_params(n_max)?;
        let samples: Vec<Vec<f64>> = (0..trajectories as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
                rng.set_stream(i);
                params
                    .iter()
                    .map(|p| {
                        Ok(p.sample_invariant(
                            self.sim.jump_cutoff,
                            self.sim.gaussian_residual,
                            &mut rng,
                        )?)
                    })
                    .collect::<Result<Vec<f64>, CylError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut stats = EnsembleStats::empty(master_seed, trajectories);
        for &n in n_grid {
            let mut norms: Vec<f64> = samples
                .iter()
                .map(|s| s[..n].iter().map(|x| x * x).sum())
                .collect();
            norms.sort_by(f64::total_cmp);
            stats.partial_norm_quantiles.push(PartialNormQuantiles {
                n_modes: n,
                time: f64::INFINITY,
                q25: quantile_sorted(&norms, 0.25),
                q50: quantile_sorted(&norms, 0.50),
                q75: quantile_sorted(&norms, 0.75),
            });
        }
        Ok(stats)
    }

    /// Per-time, per-coordinate KS distances of `X_t` against the exact
    /// invariant stable law, with the analytic KS (exact time-t law vs the
    /// invariant law) alongside; stable noise only.
    pub fn convergence_to_invariant(
        &self,
        x0: &[f64],
        times: &[f64],
        n_modes: usize,
        trajectories: usize,
        master_seed: u64,
    ) -> Result<EnsembleStats, CylError> {
        let stable = self.measure.as_stable().ok_or(OuError::NotStable)?;
        let alpha = stable.alpha();
        let ensemble =
            self.ensemble_through_times(x0, times, n_modes, trajectories, master_seed)?;
        let params = self.mode_params(n_modes)?;
        let cdf = standard_sas_cdf(alpha);
        let mut stats = EnsembleStats::empty(master_seed, trajectories);
        for (k, &t) in times.iter().enumerate() {
            for (n, p) in params.iter().enumerate() {
                let law = p.invariant_law()?;
                let samples: Vec<f64> = ensemble.iter().map(|traj| traj[k][n]).collect();
                let ks = ks_distance(&samples, |x| law.cdf(x))?;
                // Scale ratio (1-e^{-αγt})^{1/α} pins the exact-law distance.
                let ratio = (-(-alpha * p.gamma * t).exp_m1()).powf(1.0 / alpha);
                let analytic = if ratio >= 1.0 {
                    0.0
                } else if ratio <= 0.0 {
                    0.5
                } else {
                    cdf.ks_to_rescaled(ratio)
                };
                stats.coordinate_ks.push(CoordinateKs {
                    coordinate: n + 1,
                    time: t,
                    ks,
                    analytic_ks: Some(analytic),
                });
            }
        }
        Ok(stats)
    }

    /// Hit frequency of the open ball at time `t`, with the Wilson 95%
    /// interval and the product lower bound over the block split
    /// `K ∈ {1,2,4,8}`, `ε ∈ {r²/4, r²/2, 3r²/4}` (coordinates are
    /// independent, so the product of the per-block Wilson lower bounds is
    /// a conservative lower confidence bound).
    pub fn irreducibility_estimate(
        &self,
        x0: &[f64],
        ball: &Ball,
        t: f64,
        n_modes: usize,
        trajectories: usize,
        master_seed: u64,
    ) -> Result<EnsembleStats, CylError> {
        if !(ball.radius > 0.0) {
            return Err(CylError::InvalidInput(format!(
                "ball radius must be positive, got {}",
                ball.radius
            )));
        }
        if ball.center.len() > n_modes {
            return Err(CylError::InvalidInput(format!(
                "ball center has {} coordinates but the truncation is {n_modes}",
                ball.center.len()
            )));
        }
        let ensemble = self.ensemble_through_times(x0, &[t], n_modes, trajectories, master_seed)?;
        let center = |n: usize| ball.center.get(n).copied().unwrap_or(0.0);
        let r2 = ball.radius * ball.radius;

        let sq_dev = |coords: &[f64], from: usize, upto: usize| -> f64 {
            (from..upto).map(|n| (coords[n] - center(n)).powi(2)).sum()
        };
        let hits = ensemble
            .iter()
            .filter(|traj| sq_dev(&traj[0], 0, n_modes) < r2)
            .count();
        let (wilson_low, wilson_high) = wilson_interval(hits, trajectories, Z95);

        let mut best: Option<SplitLowerBound> = None;
        for &k in &[1usize, 2, 4, 8] {
            if k >= n_modes {
                continue;
            }
            for &frac in &[0.25, 0.5, 0.75] {
                let eps = frac * r2;
                let head = ensemble
                    .iter()
                    .filter(|traj| sq_dev(&traj[0], 0, k) < eps)
                    .count();
                let tail = ensemble
                    .iter()
                    .filter(|traj| sq_dev(&traj[0], k, n_modes) < r2 - eps)
                    .count();
                let (lo_head, _) = wilson_interval(head, trajectories, Z95);
                let (lo_tail, _) = wilson_interval(tail, trajectories, Z95);
                let value = lo_head * lo_tail;
                if value > 0.0 && best.as_ref().map(|b| value > b.value).unwrap_or(true) {
                    best = Some(SplitLowerBound {
                        k_split: k,
                        epsilon: eps,
                        value,
                    });
                }
            }
        }

        let mut stats = EnsembleStats::empty(master_seed, trajectories);
        stats.hits = Some(HitStats {
            hits,
            trials: trajectories,
            p_hat: hits as f64 / trajectories as f64,
            wilson_low,
            wilson_high,
            lower_bound: best,
            theorem_applicable: support_full_precheck(&self.measure),
        });
        Ok(stats)
    }
}

/// Quantile of a sorted slice at the nearest-rank position.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

#[cfg(test)]
mod tests;
