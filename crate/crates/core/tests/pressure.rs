use ergokit_core::entropy::binary_entropy;
use ergokit_core::measures::{weak_metric, MarkovMeasure, MeasureMetricConfig};
use ergokit_core::pressure::{
    chi_extremes, lyapunov, measure_pressure, pinf_report, pressure_estimate, spectrum_solve, Family,
    Potential, Target,
};
use ergokit_core::{EpsScale, ShiftSpace};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scale(m: u32) -> EpsScale {
    EpsScale::new(m).unwrap()
}

fn ln_one_plus_e() -> f64 {
    (1.0 + 1f64.exp()).ln()
}

fn random_markov(rng: &mut ChaCha8Rng) -> MarkovMeasure {
    let a: f64 = rng.random_range(0.02..0.98);
    let b: f64 = rng.random_range(0.02..0.98);
    MarkovMeasure::from_matrix(vec![vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
}

#[test]
fn binomial_identity_holds_at_every_length() {
    let phi = Potential::indicator(2, &[1], 1.0).unwrap();
    let r = pressure_estimate(&ShiftSpace::full(2), &phi, 14, scale(1)).unwrap();
    assert_eq!(r.series.len(), 14);
    for p in &r.series {
        assert!((p.value - ln_one_plus_e()).abs() < 1e-12, "n={} {}", p.n, p.value);
    }
    assert!((r.reference.unwrap() - ln_one_plus_e()).abs() < 1e-12);
}

#[test]
fn equilibrium_bernoulli_attains_the_pressure() {
    let phi = Potential::indicator(2, &[1], 1.0).unwrap();
    let e = 1f64.exp();
    let mu = MarkovMeasure::bernoulli2(e / (1.0 + e)).unwrap();
    assert!((measure_pressure(&mu, &phi).unwrap() - ln_one_plus_e()).abs() < 1e-10);
    let fixed = MarkovMeasure::fixed_point(2, 0).unwrap();
    assert_eq!(measure_pressure(&fixed, &phi).unwrap(), 0.0);
    let half = MarkovMeasure::bernoulli2(0.5).unwrap();
    let zero = Potential::constant(2, 0.0).unwrap();
    assert!((measure_pressure(&half, &zero).unwrap() - 2f64.ln()).abs() < 1e-15);
}

#[test]
fn variational_inequality_on_random_markov_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let full = ShiftSpace::full(2);
    for trial in 0..20 {
        let mu = random_markov(&mut rng);
        let table: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
        let phi = Potential::from_fn(2, 2, |w| table[(w[0] * 2 + w[1]) as usize]).unwrap();
        let top = pressure_estimate(&full, &phi, 14, scale(2)).unwrap();
        let side = measure_pressure(&mu, &phi).unwrap();
        assert!(side <= top.value + 0.05, "trial {trial}: {side} > {}", top.value);
        assert!(side <= top.reference.unwrap() + 1e-12);
    }
}

#[test]
fn parry_pair_frequency_matches_long_samples() {
    let g = ShiftSpace::golden_mean();
    let parry = MarkovMeasure::max_entropy(&g).unwrap();
    let phi = Potential::indicator(2, &[0, 1], 1.0).unwrap();
    let chi = lyapunov(&parry, &phi).unwrap();
    let exact = parry.stationary()[0] * parry.matrix()[0][1];
    assert!((chi - exact).abs() < 1e-15);
    let x = parry.sample_seeded(200_001, 9);
    let avg = phi.birkhoff(&x, 200_000).unwrap() / 200_000.0;
    assert!((avg - chi).abs() < 0.01);
}

#[test]
fn golden_zero_potential_matches_the_entropy_count() {
    let g = ShiftSpace::golden_mean();
    let zero = Potential::constant(2, 0.0).unwrap();
    let r = pressure_estimate(&g, &zero, 12, scale(1)).unwrap();
    let count = g.count_language(12).unwrap() as f64;
    assert!((r.value - count.ln() / 12.0).abs() < 1e-12);
}

#[test]
fn error_bound_intervals_contain_the_pressure() {
    // |ln F_{n+2} − n ln φ| stays below 0.25 for the golden mean counts.
    let g = ShiftSpace::golden_mean();
    let zero = Potential::constant(2, 0.0).unwrap().with_errors(vec![0.25; 14]);
    let r = pressure_estimate(&g, &zero, 14, scale(1)).unwrap();
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    for p in &r.series {
        let [lo, hi] = p.interval.unwrap();
        assert!(lo <= golden && golden <= hi, "n={}", p.n);
    }
    let short = Potential::constant(2, 0.0).unwrap().with_errors(vec![0.1; 3]);
    assert!(pressure_estimate(&g, &short, 4, scale(1)).is_err());
}

#[test]
fn entropy_targets_over_bernoulli() {
    let full = ShiftSpace::full(2);
    let fam = Family::Bernoulli { lo: 0.0, hi: 0.5 };
    for i in 0..20 {
        let h = 2f64.ln() * i as f64 / 20.0;
        let s = spectrum_solve(&full, None, &fam, Target::Entropy(h)).unwrap();
        assert!((binary_entropy(s.parameter) - h).abs() <= 1e-10, "h={h}");
        assert!(s.ergodic);
    }
}

#[test]
fn exponent_targets_are_exact() {
    let full = ShiftSpace::full(2);
    let phi = Potential::indicator(2, &[1], 1.0).unwrap();
    for i in 0..=10 {
        let a = i as f64 / 10.0;
        let s = spectrum_solve(&full, Some(&phi), &Family::bernoulli(), Target::Exponent(a)).unwrap();
        assert!((s.parameter - a).abs() < 1e-15);
        assert!(s.residual < 1e-15);
    }
}

#[test]
fn pressure_targets_on_the_gibbs_path() {
    let full = ShiftSpace::full(2);
    let phi = Potential::indicator(2, &[1], 1.0).unwrap();
    let e = 1f64.exp();
    let fam = Family::Bernoulli {
        lo: 0.0,
        hi: e / (1.0 + e),
    };
    for i in 1..=10 {
        let alpha = ln_one_plus_e() * i as f64 / 10.0;
        let s = spectrum_solve(&full, Some(&phi), &fam, Target::Pressure(alpha)).unwrap();
        let p = s.parameter;
        assert!((binary_entropy(p) + p - alpha).abs() <= 1e-10, "alpha={alpha}");
    }
    let s = spectrum_solve(&full, Some(&phi), &fam, Target::Pressure(1.0)).unwrap();
    assert!(s.residual <= 1e-10);
}

#[test]
fn line_family_on_the_golden_mean() {
    let g = ShiftSpace::golden_mean();
    let parry = MarkovMeasure::max_entropy(&g).unwrap();
    let lazy = MarkovMeasure::from_matrix(vec![vec![0.9, 0.1], vec![1.0, 0.0]]).unwrap();
    let fam = Family::Line {
        from: lazy.clone(),
        to: parry.clone(),
    };
    let target = 0.5 * (lazy.entropy() + parry.entropy());
    let s = spectrum_solve(&g, None, &fam, Target::Entropy(target)).unwrap();
    assert!(s.residual < 1e-10);
    assert!(s.measure.supported_on(&g).unwrap());
}

#[test]
fn infimum_pressure_approaches_the_minimal_exponent() {
    let full = ShiftSpace::full(2);
    for c in [1.0, -1.0, 2.5] {
        let phi = Potential::indicator(2, &[1], c).unwrap();
        let r = pinf_report(&full, &phi, 8).unwrap();
        assert_eq!(r.chi_min, f64::min(0.0, c));
        assert!(r.gap >= 0.0 && r.gap <= 1e-3, "c={c} gap={}", r.gap);
        assert!(r.boundary_distance <= 1e-3);
        // Never attained inside the family: every step stays above χ_min.
        assert!(r.steps.iter().all(|s| s[1] > r.chi_min));
    }
}

#[test]
fn karp_matches_periodic_orbit_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = ShiftSpace::golden_mean();
    for _ in 0..10 {
        let table: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi = Potential::from_fn(2, 2, |w| table[(w[0] * 2 + w[1]) as usize]).unwrap();
        let (lo, hi) = chi_extremes(&g, &phi).unwrap();
        // Oracle: averages over all periodic words of period ≤ 8.
        let (mut blo, mut bhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in 1..=8usize {
            for bits in 0u32..1 << p {
                let w: Vec<u8> = (0..p).map(|i| (bits >> i & 1) as u8).collect();
                let cyc: Vec<u8> = w.iter().chain(w.iter()).copied().collect();
                if !g.is_allowed(&cyc).unwrap() {
                    continue;
                }
                let avg = phi.birkhoff(&cyc, p).unwrap() / p as f64;
                blo = blo.min(avg);
                bhi = bhi.max(avg);
            }
        }
        assert!((lo - blo).abs() < 1e-12 && (hi - bhi).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn exponent_is_lipschitz_in_the_weak_metric(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let mu = random_markov(&mut ChaCha8Rng::seed_from_u64(s1));
        let nu = random_markov(&mut ChaCha8Rng::seed_from_u64(s2));
        let mut rng = ChaCha8Rng::seed_from_u64(s3);
        let table: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
        let phi = Potential::from_fn(2, 2, |w| table[(w[0] * 2 + w[1]) as usize]).unwrap();
        for depth in 2..=4 {
            let cfg = MeasureMetricConfig::new(depth, 2).unwrap();
            let d = weak_metric(&mu, &nu, &cfg).unwrap();
            let diff = (lyapunov(&mu, &phi).unwrap() - lyapunov(&nu, &phi).unwrap()).abs();
            prop_assert!(diff <= phi.lipschitz_constant() * d + 1e-12);
        }
    }

    #[test]
    fn measure_side_never_exceeds_the_transfer_reference(s in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mu = random_markov(&mut rng);
        let table: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let phi = Potential::from_fn(2, 1, |w| table[w[0] as usize]).unwrap();
        let top = ((table[0]).exp() + (table[1]).exp()).ln();
        prop_assert!(measure_pressure(&mu, &phi).unwrap() <= top + 1e-12);
    }
}
