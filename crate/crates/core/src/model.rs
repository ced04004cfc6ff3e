//! Diagonal model data: the generator eigenvalue sequence (γₙ), the noise
//! weight sequence (βₙ), and the Dirichlet Laplacian spectrum on `[0,π]^d`
//! with its eigenfunction evaluation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ModelError {
    #[error("invalid spectrum: {0}")]
    Invalid(String),
    #[error("mode index {requested} exceeds the spectrum capacity {capacity}")]
    OutOfRange { requested: usize, capacity: usize },
}

/// Rule generating the eigenvalue sequence `γ_n > 0` (nondecreasing and
/// unbounded for the generated families).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GammaRule {
    Explicit { gammas: Vec<f64> },
    /// `γ_n = c n^p`, `c > 0`, `p > 0`.
    Power { c: f64, p: f64 },
    /// `γ_n = log(n+1)`; included to exercise divergence of Σ 1/γ_n.
    Log,
    /// Dirichlet Laplacian on `[0,π]^d`: sorted values of `n_1² + … + n_d²`.
    Laplacian { d: usize },
}

/// Rule generating the noise weights `β_n > 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BetaRule {
    Explicit { betas: Vec<f64> },
    /// `β_n = c n^{-p}`, `c > 0`, `p` real (p < 0 gives unbounded weights).
    Power { c: f64, p: f64 },
}

/// One Laplacian mode: 1-based linear index, the multi-index it maps to, and
/// its eigenvalue. The linear order sorts eigenvalues nondecreasingly with a
/// lexicographic tie-break on the multi-index, so runs are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeIndex {
    pub index: usize,
    pub multi: Vec<u32>,
    pub gamma: f64,
}

/// The `n` smallest Dirichlet Laplacian eigenvalues on `[0,π]^d`, with
/// multiplicities as separate entries.
pub fn laplacian_spectrum(d: usize, n: usize) -> Result<Vec<ModeIndex>, ModelError> {
    if d == 0 {
        return Err(ModelError::Invalid("dimension must be at least 1".into()));
    }
    if d > 8 {
        return Err(ModelError::Invalid(format!(
            "dimension {d} is beyond the supported enumeration range (≤ 8)"
        )));
    }
    if n == 0 {
        return Err(ModelError::Invalid("need at least one mode".into()));
    }
    // Grow the eigenvalue cap until enough multi-indices fit under it.
    let mut cap = d as u64;
    let mut modes;
    loop {
        modes = enumerate_upto(d, cap);
        if modes.len() >= n {
            break;
        }
        cap *= 2;
    }
    modes.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    modes.truncate(n);
    Ok(modes
        .into_iter()
        .enumerate()
        .map(|(i, (g, multi))| ModeIndex {
            index: i + 1,
            multi,
            gamma: g as f64,
        })
        .collect())
}

fn enumerate_upto(d: usize, cap: u64) -> Vec<(u64, Vec<u32>)> {
    let mut out = Vec::new();
    let mut current = vec![1u32; d];
    fn rec(current: &mut Vec<u32>, pos: usize, remaining: u64, out: &mut Vec<(u64, Vec<u32>)>) {
        let d = current.len();
        if pos == d {
            let total: u64 = current.iter().map(|&k| (k as u64) * (k as u64)).sum();
            out.push((total, current.clone()));
            return;
        }
        let budget = remaining - (d - pos - 1) as u64; // 1² each for the rest
        let mut k = 1u32;
        while (k as u64) * (k as u64) <= budget {
            current[pos] = k;
            rec(current, pos + 1, remaining - (k as u64) * (k as u64), out);
            k += 1;
        }
    }
    if cap >= d as u64 {
        rec(&mut current, 0, cap, &mut out);
    }
    out
}

/// Dirichlet eigenfunction `e_j(ξ) = (√(2/π))^d Π sin(n_i ξ_i)` on `[0,π]^d`.
/// Exactly zero whenever a coordinate sits on the boundary.
pub fn eigenfunction_eval(multi: &[u32], point: &[f64]) -> f64 {
    assert_eq!(multi.len(), point.len(), "dimension mismatch");
    let norm = (2.0 / std::f64::consts::PI).sqrt();
    let mut v = 1.0;
    for (&k, &xi) in multi.iter().zip(point) {
        if xi <= 0.0 || xi >= std::f64::consts::PI {
            return 0.0;
        }
        v *= norm * (k as f64 * xi).sin();
    }
    v
}

/// Truncated expansion `u(ξ) = Σ_n x_n e_{j(n)}(ξ)` on a list of points;
/// linear in the coordinates.
pub fn field_eval(modes: &[ModeIndex], coords: &[f64], grid: &[Vec<f64>]) -> Vec<f64> {
    grid.iter()
        .map(|xi| {
            coords
                .iter()
                .zip(modes)
                .map(|(&x, mode)| x * eigenfunction_eval(&mode.multi, xi))
                .sum()
        })
        .collect()
}

/// A spectrum realized up to a fixed capacity: `γ_n` and `β_n` for
/// `1 ≤ n ≤ capacity`. Immutable after construction; Laplacian mode tables
/// are built once here.
#[derive(Debug, Clone)]
pub struct Spectrum {
    gamma_rule: GammaRule,
    beta_rule: BetaRule,
    capacity: usize,
    laplacian_modes: Option<Vec<ModeIndex>>,
}

impl Spectrum {
    pub fn new(
        gamma_rule: GammaRule,
        beta_rule: BetaRule,
        capacity: usize,
    ) -> Result<Self, ModelError> {
        if capacity == 0 {
            return Err(ModelError::Invalid("capacity must be at least 1".into()));
        }
        match &gamma_rule {
            GammaRule::Explicit { gammas } => {
                if gammas.len() < capacity {
                    return Err(ModelError::Invalid(format!(
                        "explicit gamma list holds {} entries, capacity needs {capacity}",
                        gammas.len()
                    )));
                }
                if gammas.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
                    return Err(ModelError::Invalid(
                        "explicit eigenvalues must be positive and finite".into(),
                    ));
                }
            }
            GammaRule::Power { c, p } => {
                if !(*c > 0.0) || !(*p > 0.0) {
                    return Err(ModelError::Invalid(format!(
                        "power eigenvalue rule needs c > 0 and p > 0, got c={c}, p={p}"
                    )));
                }
            }
            GammaRule::Log => {}
            GammaRule::Laplacian { .. } => {}
        }
        match &beta_rule {
            BetaRule::Explicit { betas } => {
                if betas.len() < capacity {
                    return Err(ModelError::Invalid(format!(
                        "explicit beta list holds {} entries, capacity needs {capacity}",
                        betas.len()
                    )));
                }
                if betas.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
                    return Err(ModelError::Invalid(
                        "noise weights must be positive and finite".into(),
                    ));
                }
            }
            BetaRule::Power { c, p } => {
                if !(*c > 0.0) || !p.is_finite() {
                    return Err(ModelError::Invalid(format!(
                        "power weight rule needs c > 0, got c={c}, p={p}"
                    )));
                }
            }
        }
        let laplacian_modes = match &gamma_rule {
            GammaRule::Laplacian { d } => Some(laplacian_spectrum(*d, capacity)?),
            _ => None,
        };
        Ok(Spectrum {
            gamma_rule,
            beta_rule,
            capacity,
            laplacian_modes,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn gamma_rule(&self) -> &GammaRule {
        &self.gamma_rule
    }

    pub fn beta_rule(&self) -> &BetaRule {
        &self.beta_rule
    }

    /// Laplacian mode table (linear order), when the rule is `Laplacian`.
    pub fn modes(&self) -> Option<&[ModeIndex]> {
        self.laplacian_modes.as_deref()
    }

    /// `γ_n` for 1-based `n ≤ capacity`.
    pub fn gamma(&self, n: usize) -> Result<f64, ModelError> {
        if n == 0 || n > self.capacity {
            return Err(ModelError::OutOfRange {
                requested: n,
                capacity: self.capacity,
            });
        }
        Ok(match &self.gamma_rule {
            GammaRule::Explicit { gammas } => gammas[n - 1],
            GammaRule::Power { c, p } => c * (n as f64).powf(*p),
            GammaRule::Log => ((n + 1) as f64).ln(),
            GammaRule::Laplacian { .. } => {
                self.laplacian_modes.as_ref().expect("built at construction")[n - 1].gamma
            }
        })
    }

    /// `β_n` for 1-based `n ≤ capacity`.
    pub fn beta(&self, n: usize) -> Result<f64, ModelError> {
        if n == 0 || n > self.capacity {
            return Err(ModelError::OutOfRange {
                requested: n,
                capacity: self.capacity,
            });
        }
        Ok(match &self.beta_rule {
            BetaRule::Explicit { betas } => betas[n - 1],
            BetaRule::Power { c, p } => c * (n as f64).powf(-p),
        })
    }

    /// Whether `sup_n β_n < ∞` is certain from the rule. Explicit prefixes
    /// are always bounded; a power rule is bounded iff `p ≥ 0`.
    pub fn beta_bounded(&self) -> bool {
        match &self.beta_rule {
            BetaRule::Explicit { .. } => true,
            BetaRule::Power { p, .. } => *p >= 0.0,
        }
    }

    /// Certified lower bound `γ_n ≥ coef · n^exp` valid for every `n ≥ 1`
    /// (None for explicit prefixes).
    ///
    /// For the Laplacian in dimension d the count of multi-indices with
    /// `|j|² ≤ R` is at most `R^{d/2}`, hence `γ_n ≥ n^{2/d}`. For the log
    /// rule, `ln(n+1) ≥ ln 2`.
    pub fn gamma_lower_bound(&self) -> Option<(f64, f64)> {
        match &self.gamma_rule {
            GammaRule::Explicit { .. } => None,
            GammaRule::Power { c, p } => Some((*c, *p)),
            GammaRule::Log => Some((2f64.ln(), 0.0)),
            GammaRule::Laplacian { d } => Some((1.0, 2.0 / *d as f64)),
        }
    }

    /// Certified upper bound `γ_n ≤ coef · n^exp` valid for every `n ≥ 1`
    /// (None for explicit prefixes).
    ///
    /// For the Laplacian with d = 1 the eigenvalues are exactly n². For
    /// d ≥ 2 the cube `[1, ⌊√(R/d)⌋]^d` sits under the cap R, so
    /// `γ_n ≤ d(n^{1/d}+1)² ≤ 4d·n^{2/d}`. For the log rule,
    /// `ln(n+1) ≤ 2√n`.
    pub fn gamma_upper_bound(&self) -> Option<(f64, f64)> {
        match &self.gamma_rule {
            GammaRule::Explicit { .. } => None,
            GammaRule::Power { c, p } => Some((*c, *p)),
            GammaRule::Log => Some((2.0, 0.5)),
            GammaRule::Laplacian { d } => {
                if *d == 1 {
                    Some((1.0, 2.0))
                } else {
                    Some((4.0 * *d as f64, 2.0 / *d as f64))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn one_dimensional_eigenvalues_are_squares() {
        let modes = laplacian_spectrum(1, 3).unwrap();
        let gammas: Vec<f64> = modes.iter().map(|m| m.gamma).collect();
        assert_eq!(gammas, vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn two_dimensional_ground_mode() {
        let modes = laplacian_spectrum(2, 1).unwrap();
        assert_eq!(modes[0].multi, vec![1, 1]);
        assert_eq!(modes[0].gamma, 2.0);
    }

    #[test]
    fn eigenvalue_five_has_multiplicity_two_in_2d() {
        // Exhaustive enumeration of n_1² + n_2² ≤ 5 gives (1,1)=2, (1,2)=5,
        // (2,1)=5; lexicographic tie-break puts (1,2) first.
        let modes = laplacian_spectrum(2, 3).unwrap();
        assert_eq!(modes[1].gamma, 5.0);
        assert_eq!(modes[2].gamma, 5.0);
        assert_eq!(modes[1].multi, vec![1, 2]);
        assert_eq!(modes[2].multi, vec![2, 1]);
    }

    #[test]
    fn sorted_eigenvalues_are_nondecreasing_and_indices_unique() {
        for d in [1usize, 2, 3] {
            let modes = laplacian_spectrum(d, 64).unwrap();
            for w in modes.windows(2) {
                assert!(w[0].gamma <= w[1].gamma);
            }
            let mut multis: Vec<&Vec<u32>> = modes.iter().map(|m| &m.multi).collect();
            multis.sort();
            multis.dedup();
            assert_eq!(multis.len(), modes.len(), "duplicate multi-index in d={d}");
            // Certified bounds hold on the prefix.
            for m in &modes {
                let n = m.index as f64;
                assert!(m.gamma >= n.powf(2.0 / d as f64) - 1e-12);
                assert!(m.gamma <= n * n + (d - 1) as f64 + 1e-12);
                if d >= 2 {
                    assert!(m.gamma <= 4.0 * d as f64 * n.powf(2.0 / d as f64) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn eigenfunction_values() {
        // d=1, n=1 at π/2: √(2/π)·sin(π/2).
        let v = eigenfunction_eval(&[1], &[PI / 2.0]);
        assert_relative_eq!(v, (2.0 / PI).sqrt(), max_relative = 1e-15);
        // Dirichlet boundary: exactly zero.
        assert_eq!(eigenfunction_eval(&[3], &[0.0]), 0.0);
        assert_eq!(eigenfunction_eval(&[3], &[PI]), 0.0);
        assert_eq!(eigenfunction_eval(&[2, 5], &[0.3, PI]), 0.0);
    }

    #[test]
    fn eigenfunctions_are_normalized() {
        // ∫_0^π e_2(ξ)² dξ = 1 by quadrature.
        let r = crate::numerics::integrate(
            |xi| {
                let e = eigenfunction_eval(&[2], &[xi]);
                e * e
            },
            0.0,
            PI,
            1e-12,
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn field_eval_is_linear() {
        let modes = laplacian_spectrum(2, 4).unwrap();
        let grid: Vec<Vec<f64>> = vec![vec![0.5, 0.7], vec![1.1, 2.0], vec![PI / 2.0, PI / 2.0]];
        let zero = field_eval(&modes, &[0.0; 4], &grid);
        assert!(zero.iter().all(|&v| v == 0.0));
        // A single coefficient reproduces that eigenfunction scaled.
        let c = 2.5;
        let single = field_eval(&modes, &[c, 0.0, 0.0, 0.0], &grid);
        for (v, xi) in single.iter().zip(&grid) {
            assert_relative_eq!(
                *v,
                c * eigenfunction_eval(&modes[0].multi, xi),
                max_relative = 1e-14
            );
        }
        // Additivity.
        let a = field_eval(&modes, &[1.0, -2.0, 0.0, 0.5], &grid);
        let b = field_eval(&modes, &[0.5, 1.0, 3.0, 0.0], &grid);
        let sum = field_eval(&modes, &[1.5, -1.0, 3.0, 0.5], &grid);
        for i in 0..grid.len() {
            assert_relative_eq!(a[i] + b[i], sum[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_parseval_on_the_truncation() {
        // Riemann sum of u² over a dense 1-d grid approaches Σ x_n².
        let modes = laplacian_spectrum(1, 3).unwrap();
        let coords = [0.8, -0.3, 0.45];
        let exact: f64 = coords.iter().map(|x| x * x).sum();
        let mut errs = Vec::new();
        for n in [200usize, 400] {
            let h = PI / n as f64;
            let grid: Vec<Vec<f64>> = (0..=n).map(|i| vec![i as f64 * h]).collect();
            let u = field_eval(&modes, &coords, &grid);
            let riemann: f64 = u.iter().map(|v| v * v * h).sum();
            errs.push((riemann - exact).abs());
        }
        assert!(errs[0] < 5e-2);
        assert!(errs[1] < errs[0], "halving the spacing must reduce the error");
    }

    #[test]
    fn spectrum_accessors_and_validation() {
        let s = Spectrum::new(
            GammaRule::Laplacian { d: 1 },
            BetaRule::Power { c: 1.0, p: 0.0 },
            16,
        )
        .unwrap();
        assert_eq!(s.gamma(1).unwrap(), 1.0);
        assert_eq!(s.gamma(4).unwrap(), 16.0);
        assert_eq!(s.beta(7).unwrap(), 1.0);
        assert!(s.gamma(17).is_err());
        assert!(s.beta_bounded());

        let unbounded = Spectrum::new(
            GammaRule::Power { c: 1.0, p: 2.0 },
            BetaRule::Power { c: 1.0, p: -1.0 },
            8,
        )
        .unwrap();
        assert!(!unbounded.beta_bounded());
        assert_eq!(unbounded.beta(3).unwrap(), 3.0);

        assert!(Spectrum::new(
            GammaRule::Explicit {
                gammas: vec![1.0, -2.0]
            },
            BetaRule::Power { c: 1.0, p: 0.0 },
            2
        )
        .is_err());
        assert!(Spectrum::new(
            GammaRule::Power { c: 1.0, p: 0.0 },
            BetaRule::Power { c: 1.0, p: 0.0 },
            4
        )
        .is_err());

        let log = Spectrum::new(GammaRule::Log, BetaRule::Power { c: 1.0, p: 0.0 }, 4).unwrap();
        assert_relative_eq!(log.gamma(1).unwrap(), 2f64.ln());
    }
}
