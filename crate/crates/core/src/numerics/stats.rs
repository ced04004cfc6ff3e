//! Sampling diagnostics used by the Monte Carlo verification layers.

use num_complex::Complex;

use super::NumericsError;

/// Empirical characteristic function `(1/M) Σ exp(i h x_m)`.
pub fn empirical_cf(samples: &[f64], h: f64) -> Result<Complex<f64>, NumericsError> {
    if samples.is_empty() {
        return Err(NumericsError::EmptySamples);
    }
    let mut sum = Complex::new(0.0, 0.0);
    for &x in samples {
        let (s, c) = (h * x).sin_cos();
        sum += Complex::new(c, s);
    }
    Ok(sum / samples.len() as f64)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and `cdf`, evaluated with both one-sided limits at each
/// sample point.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64, NumericsError> {
    if samples.is_empty() {
        return Err(NumericsError::EmptySamples);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev = f64::NEG_INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(NumericsError::InvalidInput(format!(
                "cdf({x}) = {f} is outside [0,1]"
            )));
        }
        if f < prev - 1e-12 {
            return Err(NumericsError::InvalidInput(
                "cdf is not nondecreasing on the sample points".into(),
            ));
        }
        prev = f;
        let lower = i as f64 / n;
        let upper = (i + 1) as f64 / n;
        d = d.max((f - lower).abs()).max((upper - f).abs());
    }
    Ok(d.min(1.0))
}

/// Wilson score interval for a binomial proportion at confidence `z`
/// standard normal quantiles (e.g. 1.96 for 95%).
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
