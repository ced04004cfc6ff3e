use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::levy_measure::PowerPiece;
use crate::model::{BetaRule, GammaRule};
use crate::numerics::empirical_cf;

fn heat_model(alpha: f64, n: usize) -> CylModel {
    CylModel::new(
        Spectrum::new(
            GammaRule::Laplacian { d: 1 },
            BetaRule::Power { c: 1.0, p: 0.0 },
            n,
        )
        .unwrap(),
        SymmetricLevyMeasure::stable(alpha).unwrap(),
        SimOptions::default(),
    )
}

fn noiseless_model(n: usize) -> CylModel {
    let zero = SymmetricLevyMeasure::table(vec![1.0], vec![
        PowerPiece::power(0.0, 0.0),
        PowerPiece::power(0.0, -2.0),
    ])
    .unwrap();
    CylModel::new(
        Spectrum::new(
            GammaRule::Laplacian { d: 1 },
            BetaRule::Power { c: 1.0, p: 0.0 },
            n,
        )
        .unwrap(),
        zero,
        SimOptions::default(),
    )
}

#[test]
fn zero_start_at_time_zero_is_zero() {
    let model = heat_model(1.5, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = model.simulate(&[], 0.0, 8, &mut rng).unwrap();
    assert_eq!(s.coords, vec![0.0; 8]);
    assert_eq!(s.time, 0.0);
}

#[test]
fn noiseless_coordinates_decay_exactly() {
    let model = noiseless_model(4);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x0 = [1.0, -2.0, 0.5, 3.0];
    let s = model.simulate(&x0, 0.7, 4, &mut rng).unwrap();
    for (n, &x) in s.coords.iter().enumerate() {
        let gamma = ((n + 1) * (n + 1)) as f64;
        assert_eq!(x, x0[n] * (-gamma * 0.7).exp());
    }
    // Stepping with h = 0 leaves the state untouched.
    let same = model.step(&s, 0.0, &mut rng).unwrap();
    assert_eq!(same.coords, s.coords);
}

#[test]
fn per_coordinate_law_is_the_exact_convolution() {
    let model = heat_model(1.5, 3);
    let m = 10_000;
    let t = 0.8;
    let mut samples: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(m)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..m {
        let s = model.simulate(&[], t, 3, &mut rng).unwrap();
        for (n, &x) in s.coords.iter().enumerate() {
            samples[n].push(x);
        }
    }
    let params = model.mode_params(3).unwrap();
    for (n, p) in params.iter().enumerate() {
        let law = p.convolution_law(t).unwrap();
        let d = crate::numerics::ks_distance(&samples[n], |x| law.cdf(x)).unwrap();
        assert!(
            d < 1.63 / (m as f64).sqrt(),
            "coordinate {} KS = {d}",
            n + 1
        );
    }
}

#[test]
fn markov_identity_simulate_vs_step() {
    // simulate(t+s) equals step(simulate(t), s) in law, per coordinate.
    let model = heat_model(1.5, 3);
    let m = 20_000;
    let (t, s_extra) = (0.4, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x0 = [0.5, -0.2, 0.1];
    let mut direct: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(m)).collect();
    let mut composed: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(m)).collect();
    for _ in 0..m {
        let a = model.simulate(&x0, t + s_extra, 3, &mut rng).unwrap();
        let b = model
            .step(&model.simulate(&x0, t, 3, &mut rng).unwrap(), s_extra, &mut rng)
            .unwrap();
        for n in 0..3 {
            direct[n].push(a.coords[n]);
            composed[n].push(b.coords[n]);
        }
    }
    let tol = 8.0 / (m as f64).sqrt();
    for n in 0..3 {
        for h in [0.5, 1.0, 2.0] {
            let a = empirical_cf(&direct[n], h).unwrap();
            let b = empirical_cf(&composed[n], h).unwrap();
            assert!(
                (a - b).norm() < tol,
                "coordinate {}, h={h}: CF distance {}",
                n + 1,
                (a - b).norm()
            );
        }
    }
}

#[test]
fn coordinates_are_uncorrelated() {
    let model = heat_model(1.5, 2);
    let m = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut xs, mut ys) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for _ in 0..m {
        let s = model.simulate(&[], 1.0, 2, &mut rng).unwrap();
        xs.push(s.coords[0]);
        ys.push(s.coords[1]);
    }
    let dot: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let nx: f64 = xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let ny: f64 = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
    let corr = dot / (nx * ny);
    assert!(
        corr.abs() < 4.0 / (m as f64).sqrt(),
        "empirical correlation {corr}"
    );
}

#[test]
fn partial_norms_monotone_in_truncation() {
    let model = heat_model(1.2, 32);
    let stats = model
        .h_norm_profile(&[], 1.0, &[4, 8, 16, 32], 500, 99)
        .unwrap();
    for w in stats.partial_norm_quantiles.windows(2) {
        assert!(w[0].q25 <= w[1].q25 + 1e-15);
        assert!(w[0].q50 <= w[1].q50 + 1e-15);
        assert!(w[0].q75 <= w[1].q75 + 1e-15);
    }
}

#[test]
fn noiseless_profile_is_deterministic_and_bounded() {
    let model = noiseless_model(8);
    let x0 = [1.0, 0.5, 0.25, 0.1];
    let x0_norm: f64 = x0.iter().map(|x| x * x).sum();
    let stats = model.h_norm_profile(&x0, 0.5, &[4, 8], 100, 3).unwrap();
    for q in &stats.partial_norm_quantiles {
        assert!(q.q75 <= x0_norm);
        // No noise: every trajectory coincides.
        assert_eq!(q.q25, q.q75);
    }
}

#[test]
fn ensembles_are_bit_identical_across_worker_counts() {
    let model = heat_model(1.5, 16);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            model
                .h_norm_profile(&[1.0, 0.5], 0.5, &[4, 16], 256, 1234)
                .unwrap()
        })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    // And rerunning with the same seed reproduces it exactly.
    assert_eq!(one, run(2));
}

#[test]
fn invariant_sample_coordinates_follow_the_exact_law() {
    let model = heat_model(1.5, 2);
    let m = 8_000;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut coords: Vec<Vec<f64>> = (0..2).map(|_| Vec::with_capacity(m)).collect();
    for _ in 0..m {
        let xi = model.sample_invariant(2, &mut rng).unwrap();
        coords[0].push(xi[0]);
        coords[1].push(xi[1]);
    }
    let params = model.mode_params(2).unwrap();
    for (n, p) in params.iter().enumerate() {
        let law = p.invariant_law().unwrap();
        let d = crate::numerics::ks_distance(&coords[n], |x| law.cdf(x)).unwrap();
        assert!(d < 1.63 / (m as f64).sqrt(), "mode {}: KS {d}", n + 1);
    }
}

#[test]
fn invariant_profile_quantiles_plateau_for_the_heat_model() {
    let model = heat_model(1.5, 512);
    let stats = model.invariant_profile(&[128, 256, 512], 400, 7).unwrap();
    let q = &stats.partial_norm_quantiles;
    // Medians settle: the increment from 256 to 512 modes stays small.
    let growth = (q[2].q50 - q[1].q50) / q[1].q50;
    assert!(
        growth.abs() < 0.1,
        "median grew by {growth} between truncations"
    );
}

#[test]
fn convergence_to_invariant_ks_structure() {
    let model = heat_model(1.5, 2);
    let times = [0.0, 0.5, 1.0, 2.0, 4.0];
    let stats = model
        .convergence_to_invariant(&[], &times, 2, 4_000, 21)
        .unwrap();
    // At t=0 from x0=0 the coordinate is a point mass: KS is exactly 1/2.
    let at0: Vec<&CoordinateKs> = stats
        .coordinate_ks
        .iter()
        .filter(|c| c.time == 0.0)
        .collect();
    assert!(at0.iter().all(|c| c.ks == 0.5));
    assert!(at0.iter().all(|c| c.analytic_ks == Some(0.5)));
    // Analytic KS never increases along the doubling grid, and the
    // empirical distances stay within Monte Carlo noise of it.
    let tol = 1.63 / (4_000f64).sqrt();
    for n in 1..=2 {
        let series: Vec<&CoordinateKs> = stats
            .coordinate_ks
            .iter()
            .filter(|c| c.coordinate == n)
            .collect();
        for w in series.windows(2) {
            let a = w[0].analytic_ks.unwrap();
            let b = w[1].analytic_ks.unwrap();
            assert!(b <= a + 1e-12, "analytic KS grew: {a} -> {b}");
        }
        for c in &series {
            assert!(
                c.ks <= c.analytic_ks.unwrap() + tol,
                "coordinate {n} at t={}: ks {} vs analytic {}",
                c.time,
                c.ks,
                c.analytic_ks.unwrap()
            );
        }
    }
}

#[test]
fn irreducibility_zero_noise_misses_a_disjoint_ball() {
    let model = noiseless_model(4);
    let ball = Ball {
        center: vec![10.0],
        radius: 1.0,
    };
    let stats = model
        .irreducibility_estimate(&[1.0], &ball, 1.0, 4, 200, 5)
        .unwrap();
    let hits = stats.hits.unwrap();
    assert_eq!(hits.hits, 0);
    assert_eq!(hits.p_hat, 0.0);
    assert!(!hits.theorem_applicable);
}

#[test]
fn irreducibility_generous_ball_is_hit() {
    let model = heat_model(1.5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let _ = &mut rng;
    // Center at the decayed initial datum, radius far above the per-mode
    // scales: almost every trajectory lands inside.
    let x0 = [1.0, 0.5, 0.0, 0.0];
    let t = 1.0;
    let params = model.mode_params(4).unwrap();
    let center: Vec<f64> = x0
        .iter()
        .zip(&params)
        .map(|(&x, p)| x * (-p.gamma * t).exp())
        .collect();
    let scale_sum: f64 = params
        .iter()
        .map(|p| p.convolution_scale(t).unwrap())
        .sum();
    let ball = Ball {
        center,
        radius: 10.0 * scale_sum,
    };
    let stats = model
        .irreducibility_estimate(&x0, &ball, t, 4, 2_000, 13)
        .unwrap();
    let hits = stats.hits.unwrap();
    assert!(hits.p_hat >= 0.9, "p_hat = {}", hits.p_hat);
    assert!(hits.theorem_applicable);
    // The product bound is a lower bound: it cannot exceed the upper end
    // of the direct interval.
    if let Some(lb) = &hits.lower_bound {
        assert!(lb.value <= hits.wilson_high);
    }
}

#[test]
fn support_precheck_families() {
    assert!(support_full_precheck(
        &SymmetricLevyMeasure::stable(0.7).unwrap()
    ));
    assert!(!support_full_precheck(
        &SymmetricLevyMeasure::compound_poisson(vec![(1.0, 1.0)]).unwrap()
    ));
    let positive_near_zero = SymmetricLevyMeasure::table(vec![1.0], vec![
        PowerPiece::power(1.0, -0.5),
        PowerPiece::power(1.0, -3.0),
    ])
    .unwrap();
    assert!(support_full_precheck(&positive_near_zero));
}

#[test]
fn input_validation() {
    let model = heat_model(1.5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    // Initial datum longer than the truncation.
    assert!(model.simulate(&[1.0; 5], 1.0, 4, &mut rng).is_err());
    // Negative time.
    assert!(model.simulate(&[], -1.0, 4, &mut rng).is_err());
    // Empty or non-increasing truncation grids.
    assert!(model.h_norm_profile(&[], 1.0, &[], 200, 0).is_err());
    assert!(model.h_norm_profile(&[], 1.0, &[8, 4], 200, 0).is_err());
    // Quantiles need a minimal ensemble.
    assert!(model.h_norm_profile(&[], 1.0, &[4], 0, 0).is_err());
    assert!(model.h_norm_profile(&[], 1.0, &[4], 99, 0).is_err());
    // Bad ball.
    let ball = Ball {
        center: vec![0.0; 8],
        radius: 1.0,
    };
    assert!(model
        .irreducibility_estimate(&[], &ball, 1.0, 4, 10, 0)
        .is_err());
}
