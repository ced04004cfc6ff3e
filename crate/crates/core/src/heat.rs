//! Preconfigured end-to-end scenario: the linear stochastic heat equation
//! on `[0,π]^d` with Dirichlet boundary conditions, driven along the
//! Laplacian eigenbasis. Wires the spectrum into the membership criterion,
//! simulates the truncated system, and reconstructs field snapshots on a
//! product grid for one flagged trajectory while the rest of the ensemble
//! feeds the statistics.

use serde::Serialize;
use thiserror::Error;

use crate::criteria::{self, CriteriaError, CriterionReport, SufficientReport};
use crate::cylindrical::{CylError, CylModel, EnsembleStats, PartialNormQuantiles, SimOptions};
use crate::levy_measure::SymmetricLevyMeasure;
use crate::model::{self, BetaRule, GammaRule, ModelError, Spectrum};

#[derive(Debug, Clone, Error)]
pub enum HeatError {
    #[error(transparent)]
    Cylindrical(#[from] CylError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct HeatScenario {
    pub d: usize,
    pub n_modes: usize,
    pub measure: SymmetricLevyMeasure,
    pub beta_rule: BetaRule,
    /// Initial datum as finitely many (1-based linear mode, coefficient)
    /// pairs in the sorted eigenvalue order.
    pub initial_modes: Vec<(usize, f64)>,
    /// Grid points per axis, boundary included.
    pub grid_points_per_axis: usize,
    pub sim: SimOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub time: f64,
    /// Field values matching `HeatRun::grid` pointwise.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatRun {
    pub criterion: CriterionReport,
    pub sufficient: SufficientReport,
    /// Grid points in `[0,π]^d`, row-major over the per-axis grid.
    pub grid: Vec<Vec<f64>>,
    /// Field snapshots of the flagged trajectory (stream 0) at each time.
    pub snapshots: Vec<Snapshot>,
    pub stats: EnsembleStats,
}

impl HeatScenario {
    pub fn run(
        &self,
        times: &[f64],
        trajectories: usize,
        master_seed: u64,
    ) -> Result<HeatRun, HeatError> {
        if self.n_modes == 0 {
            return Err(HeatError::Invalid("need at least one mode".into()));
        }
        if self.grid_points_per_axis < 2 {
            return Err(HeatError::Invalid(
                "need at least the two boundary points per axis".into(),
            ));
        }
        let grid_size = (self.grid_points_per_axis as f64).powi(self.d as i32);
        if !(grid_size <= 2e6) {
            return Err(HeatError::Invalid(format!(
                "grid of {grid_size} points is beyond desk scale"
            )));
        }
        if times.is_empty() || times.windows(2).any(|w| w[0] >= w[1]) || times[0] < 0.0 {
            return Err(HeatError::Invalid(
                "times must be nonnegative and strictly increasing".into(),
            ));
        }

        // The criterion classifier needs a minimal prefix length even for
        // tiny scenarios.
        let n_crit = self.n_modes.max(16);
        let spectrum = Spectrum::new(
            GammaRule::Laplacian { d: self.d },
            self.beta_rule.clone(),
            n_crit,
        )?;
        let criterion = criteria::ou_criterion(&self.measure, &spectrum, n_crit, 1e-6, 1.0)?;
        let sufficient = criteria::sufficient_condition(&self.measure, &spectrum, n_crit)?;

        let mut x0 = vec![0.0; self.n_modes];
        for &(mode, coefficient) in &self.initial_modes {
            if mode == 0 || mode > self.n_modes {
                return Err(HeatError::Invalid(format!(
                    "initial mode {mode} is outside 1..={}",
                    self.n_modes
                )));
            }
            x0[mode - 1] = coefficient;
        }

        let model = CylModel::new(spectrum, self.measure.clone(), self.sim);
        let ensemble =
            model.ensemble_through_times(&x0, times, self.n_modes, trajectories, master_seed)?;

        let grid = product_grid(self.d, self.grid_points_per_axis);
        let modes = model.spectrum.modes().expect("laplacian rule").to_vec();
        let snapshots: Vec<Snapshot> = times
            .iter()
            .enumerate()
            .map(|(k, &time)| Snapshot {
                time,
                values: model::field_eval(&modes[..self.n_modes], &ensemble[0][k], &grid),
            })
            .collect();

        // Partial-norm quantiles over a small truncation ladder at each time.
        let mut stats = EnsembleStats {
            master_seed,
            trajectories,
            partial_norm_quantiles: Vec::new(),
            coordinate_ks: Vec::new(),
            hits: None,
        };
        let mut ladder: Vec<usize> = [
            self.n_modes / 4,
            self.n_modes / 2,
            3 * self.n_modes / 4,
            self.n_modes,
        ]
        .iter()
        .copied()
        .filter(|&n| n >= 1)
        .collect();
        ladder.dedup();
        for (k, &time) in times.iter().enumerate() {
            for &n in &ladder {
                let mut norms: Vec<f64> = ensemble
                    .iter()
                    .map(|traj| traj[k][..n].iter().map(|x| x * x).sum())
                    .collect();
                norms.sort_by(f64::total_cmp);
                let q = |p: f64| {
                    let idx = ((norms.len() - 1) as f64 * p).round() as usize;
                    norms[idx]
                };
                stats.partial_norm_quantiles.push(PartialNormQuantiles {
                    n_modes: n,
                    time,
                    q25: q(0.25),
                    q50: q(0.50),
                    q75: q(0.75),
                });
            }
        }

        Ok(HeatRun {
            criterion,
            sufficient,
            grid,
            snapshots,
            stats,
        })
    }
}

/// Row-major product grid over `[0,π]^d` with `k` points per axis, boundary
/// included (endpoints are exactly 0 and π).
pub fn product_grid(d: usize, k: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..k)
        .map(|i| {
            if i == k - 1 {
                std::f64::consts::PI
            } else {
                i as f64 * std::f64::consts::PI / (k - 1) as f64
            }
        })
        .collect();
    let mut out = Vec::with_capacity(axis.len().pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        out.push(idx.iter().map(|&i| axis[i]).collect());
        let mut pos = d;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < axis.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::PowerPiece;
    use crate::numerics::Verdict;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn zero_measure() -> SymmetricLevyMeasure {
        SymmetricLevyMeasure::table(vec![1.0], vec![
            PowerPiece::power(0.0, 0.0),
            PowerPiece::power(0.0, -2.0),
        ])
        .unwrap()
    }

    fn stable_scenario(d: usize, n_modes: usize) -> HeatScenario {
        HeatScenario {
            d,
            n_modes,
            measure: SymmetricLevyMeasure::stable(1.5).unwrap(),
            beta_rule: BetaRule::Power { c: 1.0, p: 0.0 },
            initial_modes: vec![],
            grid_points_per_axis: 17,
            sim: SimOptions::default(),
        }
    }

    #[test]
    fn heat_1d_stable_criterion_converges() {
        let run = stable_scenario(1, 16).run(&[1.0], 50, 3).unwrap();
        assert_eq!(run.criterion.verdict.verdict, Verdict::Converged);
        assert!(run.sufficient.applies);
    }

    #[test]
    fn zero_datum_at_time_zero_gives_a_zero_snapshot() {
        let mut s = stable_scenario(1, 8);
        s.measure = zero_measure();
        let run = s.run(&[1e-9, 1.0], 10, 0).unwrap();
        assert!(run.snapshots[0].values.iter().all(|&v| v.abs() < 1e-20));
    }

    #[test]
    fn snapshots_vanish_on_the_boundary() {
        let run = stable_scenario(2, 6).run(&[0.5], 20, 1).unwrap();
        for (point, value) in run.grid.iter().zip(&run.snapshots[0].values) {
            if point.iter().any(|&c| c == 0.0 || c == PI) {
                assert_eq!(*value, 0.0, "nonzero field at boundary point {point:?}");
            }
        }
    }

    #[test]
    fn noiseless_2d_decay_is_driven_by_the_ground_mode() {
        // Ground mode (1,1) has eigenvalue 2: sup-norm decays as e^{-2t}.
        let s = HeatScenario {
            d: 2,
            n_modes: 4,
            measure: zero_measure(),
            beta_rule: BetaRule::Power { c: 1.0, p: 0.0 },
            initial_modes: vec![(1, 1.0)],
            grid_points_per_axis: 21,
            sim: SimOptions::default(),
        };
        let run = s.run(&[0.5, 1.0], 5, 0).unwrap();
        let sup = |values: &[f64]| values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let ratio = sup(&run.snapshots[1].values) / sup(&run.snapshots[0].values);
        assert_relative_eq!(ratio, (-2.0 * 0.5f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn grid_parseval_improves_under_refinement() {
        let mut s = stable_scenario(1, 6);
        s.initial_modes = vec![(1, 0.8), (3, -0.4)];
        s.measure = zero_measure();
        let mut errors = Vec::new();
        for k in [41usize, 81] {
            s.grid_points_per_axis = k;
            let run = s.run(&[0.3], 5, 0).unwrap();
            let h = PI / (k - 1) as f64;
            let riemann: f64 = run.snapshots[0].values.iter().map(|v| v * v * h).sum();
            // Coordinates at t: e^{-γ_n t} x_n; compare to Σ x_n(t)².
            let exact = 0.8f64.powi(2) * (-2.0 * 1.0 * 0.3f64).exp()
                + 0.4f64.powi(2) * (-2.0 * 9.0 * 0.3f64).exp();
            errors.push((riemann - exact).abs());
        }
        assert!(errors[1] < errors[0], "refinement must help: {errors:?}");
        assert!(errors[1] < 1e-3);
    }

    #[test]
    fn scenario_validation() {
        let mut s = stable_scenario(1, 8);
        s.initial_modes = vec![(9, 1.0)];
        assert!(s.run(&[1.0], 5, 0).is_err());
        let mut s = stable_scenario(1, 8);
        s.grid_points_per_axis = 1;
        assert!(s.run(&[1.0], 5, 0).is_err());
        let s = stable_scenario(1, 8);
        assert!(s.run(&[1.0, 0.5], 5, 0).is_err());
        assert!(s.run(&[], 5, 0).is_err());
    }
}
