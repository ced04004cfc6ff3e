//! Convergence classification for nonnegative series.
//!
//! The classifier only declares `Converged` or `Diverged` when it holds a
//! tail certificate: a caller-supplied closed-form remainder bound, or (with
//! the monotone hint) a geometric/power fit over the last computed window.
//! Everything else is an honest `Inconclusive`: a finite prefix of a
//! black-box series proves nothing on its own.

use serde::Serialize;

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Converged,
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesVerdict {
    pub verdict: Verdict,
    /// Sum of the first `terms_used` terms.
    pub partial_sum: f64,
    /// Upper bound for the remainder past `terms_used`; present whenever the
    /// verdict is `Converged`.
    pub tail_bound: Option<f64>,
    pub terms_used: usize,
}

/// Closed-form knowledge about the remainder after the first `n` terms.
#[derive(Debug, Clone, Copy)]
pub enum TailBound {
    /// The remainder is at most this value.
    UpperBound(f64),
    /// The remainder is infinite: the series diverges.
    Infinite,
    Unknown,
}

/// Classify `Σ term(n)` from its first `n_max` terms (1-based indices).
///
/// With `monotone_hint` the caller promises the terms are eventually
/// nonincreasing, enabling the ratio/integral-style tail heuristics.
pub fn classify_series<F: Fn(usize) -> f64>(
    term: F,
    n_max: usize,
    tol: f64,
    monotone_hint: bool,
) -> Result<SeriesVerdict, NumericsError> {
    classify_series_with(term, n_max, tol, monotone_hint, None)
}

/// [`classify_series`] with an optional closed-form tail certificate.
/// The certificate, when it answers, overrides every heuristic.
pub fn classify_series_with<F: Fn(usize) -> f64>(
    term: F,
    n_max: usize,
    tol: f64,
    monotone_hint: bool,
    certificate: Option<&dyn Fn(usize) -> TailBound>,
) -> Result<SeriesVerdict, NumericsError> {
    if n_max < 16 {
        return Err(NumericsError::InvalidInput(format!(
            "n_max must be at least 16, got {n_max}"
        )));
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidInput(
            "tolerance must be positive".into(),
        ));
    }

    let mut terms = Vec::with_capacity(n_max);
    let mut partial = 0.0;
    for n in 1..=n_max {
        let a = term(n);
        if !a.is_finite() || a < 0.0 {
            return Err(NumericsError::BadTerm { index: n, value: a });
        }
        partial += a;
        terms.push(a);
    }

    let done = |verdict, tail_bound| SeriesVerdict {
        verdict,
        partial_sum: partial,
        tail_bound,
        terms_used: n_max,
    };

    if let Some(cert) = certificate {
        match cert(n_max) {
            TailBound::UpperBound(b) if b.is_finite() && b >= 0.0 => {
                return Ok(done(Verdict::Converged, Some(b)));
            }
            TailBound::Infinite => return Ok(done(Verdict::Diverged, None)),
            _ => {}
        }
    }

    if terms.iter().all(|&a| a == 0.0) {
        return Ok(done(Verdict::Converged, Some(0.0)));
    }

    // Terms that fail to approach zero settle divergence without any hint.
    let quarter = (n_max / 4).max(4);
    let head_max = terms[..quarter].iter().cloned().fold(0.0, f64::max);
    let tail_min = terms[n_max - quarter..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let floor = 1e3 * f64::EPSILON * (1.0 + partial.abs());
    if tail_min > floor && tail_min >= 0.9 * head_max {
        return Ok(done(Verdict::Diverged, None));
    }

    if monotone_hint {
        // Monotone terms that actually reach zero stay zero.
        if terms[n_max - 1] == 0.0 {
            return Ok(done(Verdict::Converged, Some(0.0)));
        }
        let window = &terms[n_max / 2..];
        if window.iter().all(|&a| a > 0.0) {
            let n0 = n_max / 2 + 1;
            let a_last = terms[n_max - 1];
            let mut best_bound = f64::INFINITY;

            // Geometric model: ln a_n linear in n with slope ln r < 0.
            if let Some((slope, resid)) = fit_line(window, |i| (n0 + i) as f64) {
                let r = slope.exp();
                if resid < 0.1 && r < 0.999 {
                    best_bound = best_bound.min(1.5 * a_last * r / (1.0 - r));
                }
            }
            // Power model: ln a_n linear in ln n with slope q.
            if let Some((q, resid)) = fit_line(window, |i| ((n0 + i) as f64).ln()) {
                if resid < 0.1 {
                    if q <= -1.05 {
                        // Integral-test style remainder: Σ_{k>N} C k^q ≤ C N^{q+1}/(-q-1).
                        best_bound = best_bound.min(1.5 * a_last * n_max as f64 / (-q - 1.0));
                    } else if q >= -1.02 {
                        // Remainder dominated by the divergent ∫ x^q dx, q ≥ -1.
                        return Ok(done(Verdict::Diverged, None));
                    }
                }
            }
            if best_bound <= tol {
                return Ok(done(Verdict::Converged, Some(best_bound)));
            }
        }
    }

    Ok(done(Verdict::Inconclusive, None))
}

/// Least-squares fit of ln(terms) against `abscissa(i)`; returns
/// (slope, max absolute residual).
fn fit_line(window: &[f64], abscissa: impl Fn(usize) -> f64) -> Option<(f64, f64)> {
    let m = window.len();
    if m < 4 {
        return None;
    }
    let xs: Vec<f64> = (0..m).map(&abscissa).collect();
    let ys: Vec<f64> = window.iter().map(|&a| a.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / m as f64;
    let ybar = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let resid = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Some((slope, resid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basel_series_converges_within_tail_bound() {
        let v = classify_series(|n| 1.0 / (n * n) as f64, 10_000, 1e-3, true).unwrap();
        assert_eq!(v.verdict, Verdict::Converged);
        let bound = v.tail_bound.unwrap();
        assert!(bound <= 1e-3);
        let basel = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!(
            (basel - v.partial_sum).abs() <= bound,
            "partial {} vs {} bound {}",
            v.partial_sum,
            basel,
            bound
        );
    }

    #[test]
    fn harmonic_series_diverges() {
        let v = classify_series(|n| 1.0 / n as f64, 4_096, 1e-6, true).unwrap();
        assert_eq!(v.verdict, Verdict::Diverged);
    }

    #[test]
    fn zero_series_converges_exactly() {
        let v = classify_series(|_| 0.0, 64, 1e-9, false).unwrap();
        assert_eq!(v.verdict, Verdict::Converged);
        assert_eq!(v.partial_sum, 0.0);
        assert_eq!(v.tail_bound, Some(0.0));
    }

    #[test]
    fn harmonic_never_converges_geometric_never_diverges() {
        for n_max in [16, 32, 100, 1_000, 10_000] {
            let h = classify_series(|n| 1.0 / n as f64, n_max, 1e-6, true).unwrap();
            assert_ne!(h.verdict, Verdict::Converged, "harmonic at n_max={n_max}");
            let g = classify_series(|n| 0.5f64.powi(n as i32), n_max, 1e-6, true).unwrap();
            assert_ne!(g.verdict, Verdict::Diverged, "2^-n at n_max={n_max}");
        }
    }

    #[test]
    fn geometric_series_certified_when_tail_small_enough() {
        let v = classify_series(|n| 0.5f64.powi(n as i32), 64, 1e-6, true).unwrap();
        assert_eq!(v.verdict, Verdict::Converged);
        assert!((v.partial_sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_terms_diverge_without_hint() {
        let v = classify_series(|_| 2.0, 64, 1e-6, false).unwrap();
        assert_eq!(v.verdict, Verdict::Diverged);
    }

    #[test]
    fn negative_term_is_an_input_error() {
        let e = classify_series(|n| if n == 5 { -1.0 } else { 1.0 }, 16, 1e-6, false);
        assert!(matches!(e, Err(NumericsError::BadTerm { index: 5, .. })));
    }

    #[test]
    fn closed_form_certificate_wins() {
        // Slowly decaying prefix, but the caller knows the closed-form tail.
        let cert = |_n: usize| TailBound::UpperBound(0.25);
        let v = classify_series_with(|n| 1.0 / n as f64, 32, 1e-9, false, Some(&cert)).unwrap();
        assert_eq!(v.verdict, Verdict::Converged);
        assert_eq!(v.tail_bound, Some(0.25));

        let cert = |_n: usize| TailBound::Infinite;
        let v = classify_series_with(|n| 1.0 / (n * n) as f64, 32, 1e-9, false, Some(&cert))
            .unwrap();
        assert_eq!(v.verdict, Verdict::Diverged);
    }

    #[test]
    fn small_n_max_rejected() {
        assert!(classify_series(|_| 1.0, 15, 1e-6, false).is_err());
    }
}
