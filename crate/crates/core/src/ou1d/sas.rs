//! Chambers-Mallows-Stuck sampling of symmetric α-stable laws in the
//! convention `E e^{ihY} = e^{-σ^α |h|^α}`.

use rand::Rng;

/// One draw from the standard symmetric α-stable law (σ = 1).
pub fn sample_standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 2.0);
    let u = (rng.random::<f64>() - 0.5) * std::f64::consts::PI;
    if alpha == 1.0 {
        return u.tan();
    }
    let w = standard_exponential(rng);
    let num = (alpha * u).sin();
    let den = u.cos().powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha);
    num / den * tail
}

fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return -r.ln();
        }
    }
}

/// Symmetric α-stable law with characteristic function `e^{-σ^α|h|^α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableLaw {
    pub alpha: f64,
    pub sigma: f64,
}

impl StableLaw {
    pub fn new(alpha: f64, sigma: f64) -> Self {
        assert!(alpha > 0.0 && alpha < 2.0, "stable index must be in (0,2)");
        assert!(sigma >= 0.0, "scale must be nonnegative");
        StableLaw { alpha, sigma }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        self.sigma * sample_standard_sas(self.alpha, rng)
    }

    /// CDF through the shared per-α table; degenerate σ = 0 is the unit
    /// step at the origin.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.sigma == 0.0 {
            return if x >= 0.0 { 1.0 } else { 0.0 };
        }
        super::cdf::standard_sas_cdf(self.alpha).eval(x / self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::empirical_cf;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_scale_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let law = StableLaw::new(1.3, 0.0);
        for _ in 0..16 {
            assert_eq!(law.sample(&mut rng), 0.0);
        }
    }

    #[test]
    fn cauchy_quartiles() {
        // α = 1, σ = 1 is standard Cauchy with quartiles ±1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 100_000;
        let mut xs: Vec<f64> = (0..m)
            .map(|_| StableLaw::new(1.0, 1.0).sample(&mut rng))
            .collect();
        xs.sort_by(f64::total_cmp);
        let q25 = xs[m / 4];
        let q75 = xs[3 * m / 4];
        let tol = 3.0 * 2.0 / (m as f64).sqrt(); // 3·IQR/√M with IQR = 2
        assert!((q25 + 1.0).abs() < tol, "q25 = {q25}");
        assert!((q75 - 1.0).abs() < tol, "q75 = {q75}");
    }

    #[test]
    fn empirical_cf_matches_the_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 100_000;
        for &(alpha, sigma) in &[(0.7, 1.0), (1.0, 0.5), (1.5, 1.2)] {
            let law = StableLaw::new(alpha, sigma);
            let xs: Vec<f64> = (0..m).map(|_| law.sample(&mut rng)).collect();
            for &h in &[0.5f64, 1.0] {
                let target = (-(sigma * h.abs()).powf(alpha)).exp();
                let got = empirical_cf(&xs, h).unwrap();
                let tol = 4.0 / (m as f64).sqrt();
                assert!(
                    (got.re - target).abs() < tol && got.im.abs() < tol,
                    "α={alpha} σ={sigma} h={h}: {got} vs {target}"
                );
            }
        }
    }
}
