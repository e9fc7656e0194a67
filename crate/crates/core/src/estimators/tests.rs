use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;
use crate::systems::{Bernoulli, FiniteCyclic, Rotation, Substitution};

type C = Complex<f64>;

fn signal(values: Vec<C>) -> SampledSignal<f64> {
    SampledSignal::new(values)
}

/// The O(NK) double loop the FFT path must reproduce.
fn naive(s: &[C], k: usize) -> Vec<C> {
    let n = s.len();
    (0..=k)
        .map(|lag| (0..n - lag).fold(C::new(0.0, 0.0), |a, i| a + s[i + lag] * s[i].conj()) / n as f64)
        .collect()
}

fn random_signal(n: usize, seed: u64) -> Vec<C> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

#[test]
fn constant_signal_counts_summands() {
    let c = empirical_autocorrelation(&signal(vec![C::new(1.0, 0.0); 1000]), 5).unwrap();
    assert!((c.at(5).re - 0.995).abs() < 1e-12);
    assert!((c.at(-5).re - 0.995).abs() < 1e-12);
}

#[test]
fn alternating_signal() {
    let n = 10_000;
    let s: Vec<C> = (0..n).map(|i| C::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    let k = 100;
    let c = empirical_autocorrelation(&signal(s), k).unwrap();
    for lag in 0..=k as i64 {
        let sign = if lag % 2 == 0 { 1.0 } else { -1.0 };
        assert!((c.at(lag).re - sign).abs() <= k as f64 / n as f64);
    }
}

#[test]
fn single_spike() {
    let mut s = vec![C::new(0.0, 0.0); 100];
    s[0] = C::new(1.0, 0.0);
    let c = empirical_autocorrelation(&signal(s), 10).unwrap();
    assert!((c.c0() - 0.01).abs() < 1e-15);
    assert!((1..=10).all(|k| c.at(k).norm() < 1e-15));
}

#[test]
fn rejects_resolution_violation() {
    assert!(empirical_autocorrelation(&signal(vec![C::new(1.0, 0.0); 100]), 11).is_err());
    assert!(EstimatorParams::new(11, 100, 100, 0).validate().is_err());
    assert!(EstimatorParams::new(10, 100, 99, 0).validate().is_err());
    assert!(EstimatorParams::new(10, 100, 100, 0).validate().is_ok());
}

#[test]
fn fft_matches_naive_oracle() {
    let s = random_signal(10_000, 3);
    let c = empirical_autocorrelation(&signal(s.clone()), 1000).unwrap();
    let oracle = naive(&s, 1000);
    let scale = oracle[0].norm();
    for (k, o) in oracle.iter().enumerate() {
        assert!((c.at(k as i64) - o).norm() <= 1e-10 * scale, "lag {k}");
    }
}

#[test]
fn lag_extended_matches_direct_sum() {
    let s = random_signal(1_100, 5);
    let c = lag_extended_autocorrelation(&s, 1000, 100).unwrap();
    for k in 0..=100usize {
        let direct = (0..1000).fold(C::new(0.0, 0.0), |a, i| a + s[i + k] * s[i].conj()) / 1000.0;
        assert!((c.at(k as i64) - direct).norm() < 1e-12);
    }
    assert!(lag_extended_autocorrelation(&s, 1001, 100).is_err());
}

#[test]
fn lag_extended_is_exact_on_periodic_orbits() {
    let spec = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(12).unwrap());
    let f = Observable::<f64>::letter_weights((0..12).map(|i| C::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect());
    let params = EstimatorParams::new(50, 1200, 100, 1).with_window(WindowConvention::LagExtended);
    let orbit = orbit_autocorrelation(&spec, &f, &State::Cyclic(5), &params).unwrap();
    let exact = exact_coefficients_finite(&spec, &f, 50).unwrap();
    for n in -50..=50 {
        assert!((orbit.at(n) - exact.at(n)).norm() < 1e-12, "lag {n}");
    }
}

#[test]
fn mc_constant_is_exact() {
    let spec = SystemSpec::BernoulliShift(Bernoulli::fair_sign());
    let c = spectral_coefficients_mc(&spec, &Observable::<f64>::one(), &EstimatorParams::new(5, 50, 200, 9)).unwrap();
    assert!((-5..=5).all(|n| (c.at(n) - C::new(1.0, 0.0)).norm() < 1e-15));
    assert!(c.stderr().unwrap().iter().all(|&e| e < 1e-12));
}

#[test]
fn mc_rotation_character_is_zero_variance() {
    let rot = Rotation::golden_mean();
    let alpha = rot.alpha();
    let spec = SystemSpec::IrrationalRotation(rot);
    let c = spectral_coefficients_mc(&spec, &Observable::<f64>::rotation_eigenfunction(), &EstimatorParams::new(20, 200, 100, 4))
        .unwrap();
    for n in -20..=20i64 {
        let expect = crate::scalar::turn::<f64>(n as f64 * alpha);
        assert!((c.at(n) - expect).norm() < 1e-9, "lag {n}");
    }
    // the literal character e^{2πiξ} carries the opposite phase
    let lit = spectral_coefficients_mc(&spec, &Observable::<f64>::character(1), &EstimatorParams::new(3, 30, 100, 4)).unwrap();
    assert!((lit.at(1) - crate::scalar::turn::<f64>(-alpha)).norm() < 1e-9);
}

#[test]
fn mc_bernoulli_decorrelates() {
    let spec = SystemSpec::BernoulliShift(Bernoulli::fair_sign());
    let m = 20_000;
    let c = spectral_coefficients_mc(&spec, &Observable::<f64>::sign(), &EstimatorParams::new(10, 100, m, 17)).unwrap();
    assert!((c.c0() - 1.0).abs() < 1e-12);
    for n in 1..=10 {
        assert!(c.at(n).norm() <= 3.0 / (m as f64).sqrt() * 2f64.sqrt(), "lag {n}: {}", c.at(n));
    }
}

#[test]
fn mc_is_seed_deterministic() {
    let spec = SystemSpec::SubstitutionSubshift(Substitution::fibonacci());
    let p = EstimatorParams::new(8, 80, 500, 123);
    let a = spectral_coefficients_mc(&spec, &Observable::<f64>::sign(), &p).unwrap();
    let b = spectral_coefficients_mc(&spec, &Observable::<f64>::sign(), &p).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_finite_examples() {
    let four = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(4).unwrap());
    let c = exact_coefficients_finite(&four, &Observable::<f64>::indicator(0), 9).unwrap();
    for n in -9..=9i64 {
        let expect = if n.rem_euclid(4) == 0 { 0.25 } else { 0.0 };
        assert!((c.at(n).re - expect).abs() < 1e-15 && c.at(n).im == 0.0);
    }
    let two = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(2).unwrap());
    let f = Observable::<f64>::letter_weights(vec![C::new(1.0, 0.0), C::new(-1.0, 0.0)]);
    let c = exact_coefficients_finite(&two, &f, 5).unwrap();
    assert!((-5..=5i64).all(|n| (c.at(n).re - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-15));
    let c = exact_coefficients_finite(&four, &Observable::<f64>::one(), 3).unwrap();
    assert!((-3..=3).all(|n| (c.at(n).re - 1.0).abs() < 1e-15));
    let rot = SystemSpec::IrrationalRotation(Rotation::golden_mean());
    assert!(exact_coefficients_finite(&rot, &Observable::<f64>::one(), 3).is_err());
}

#[test]
fn nmap_examples() {
    let spec = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(4).unwrap());
    let f = Observable::<f64>::indicator(0);
    let x = State::Cyclic(3);
    assert_eq!(nmap_apply(&TestFunction::delta(0), &f, &spec, &x).unwrap(), f.eval(&spec, &x).unwrap());
    assert_eq!(nmap_apply(&TestFunction::delta(3), &f, &spec, &x).unwrap(), C::new(1.0, 0.0));
    let phi = TestFunction::from_real(0, &[1.0, 1.0]);
    assert_eq!(nmap_apply(&phi, &Observable::one(), &spec, &x).unwrap(), C::new(2.0, 0.0));
    assert_eq!(nmap_apply(&TestFunction::zero(), &f, &spec, &x).unwrap(), C::new(0.0, 0.0));
}

fn random_weights(n: usize, seed: u64) -> Observable<f64> {
    Observable::letter_weights(random_signal(n, seed))
}

fn random_phi(radius: i64, seed: u64) -> TestFunction<f64> {
    let vals = random_signal((2 * radius + 1) as usize, seed);
    TestFunction::new(-radius, vals)
}

#[test]
fn n3_is_exact_on_finite_cyclic() {
    let spec = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(12).unwrap());
    let f = random_weights(12, 8);
    let params = EstimatorParams::new(12, 120, 100, 0);
    let c = exact_coefficients_finite(&spec, &f, 12).unwrap();
    let d = TestFunction::delta(0);
    assert!(n3_residual(&c, &d, &d, &spec, &f, &params).unwrap() <= 1e-12);
    for seed in 0..10 {
        let (phi, psi) = (random_phi(3, seed), random_phi(3, seed + 100));
        assert!(n3_residual(&c, &phi, &psi, &spec, &f, &params).unwrap() <= 1e-12);
    }
}

#[test]
fn n3_rotation_within_statistical_tolerance() {
    let rot = Rotation::golden_mean();
    let alpha = rot.alpha();
    let spec = SystemSpec::IrrationalRotation(rot);
    let f = Observable::<f64>::rotation_eigenfunction();
    let c = PosDefSequence::from_fn(4, |n| crate::scalar::turn::<f64>(n as f64 * alpha)).unwrap();
    let params = EstimatorParams::new(4, 40, 1000, 2);
    let r = n3_residual(&c, &TestFunction::delta(0), &TestFunction::delta(1), &spec, &f, &params).unwrap();
    assert!(r <= 5e-2, "{r}");
}

#[test]
fn nmap_coefficients_match_convolution_on_finite() {
    // ⟨Uⁿg, g⟩ for g = 𝒩^f(φ) equals Σ_m c_{n+m}(φ∗φ̃)(m)
    let spec = SystemSpec::FiniteCyclic(FiniteCyclic::uniform(6).unwrap());
    let f = random_weights(6, 21);
    let phi = random_phi(2, 22);
    let c = exact_coefficients_finite(&spec, &f, 12).unwrap();
    let corr = phi.self_correlation();
    for n in -4..=4i64 {
        let lhs = corr.iter().fold(C::new(0.0, 0.0), |a, (m, v)| a + c.at(n + m) * v);
        let rhs = exact_inner_product(
            &spec,
            |x| nmap_apply(&phi, &f, &spec, &spec.shift(x, n)?),
            |x| nmap_apply(&phi, &f, &spec, x),
        )
        .unwrap();
        assert!((lhs - rhs).norm() < 1e-12, "lag {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn biased_estimate_is_positive_definite(seed in 0u64..10_000, n in 20usize..400) {
        let s = random_signal(n, seed);
        let k = n / 10;
        let c = empirical_autocorrelation(&signal(s), k).unwrap();
        // the Fejér mean of a positive-definite window is a nonnegative density
        let w = crate::algebra::bochner_density(&c, (8 * k).max(4).next_power_of_two(), k).unwrap();
        prop_assert!(w.iter().all(|&d| d >= -1e-12 * c.c0()));
    }

    #[test]
    fn fft_agrees_with_naive(seed in 0u64..10_000, n in 10usize..600) {
        let s = random_signal(n, seed);
        let k = n / 10;
        let c = empirical_autocorrelation(&signal(s.clone()), k).unwrap();
        let o = naive(&s, k);
        for (lag, v) in o.iter().enumerate() {
            prop_assert!((c.at(lag as i64) - v).norm() <= 1e-10 * o[0].norm());
        }
    }

    #[test]
    fn nmap_is_equivariant(which in 0usize..5, seed in 0u64..1000, radius in 0i64..6) {
        let cases: Vec<(SystemSpec, Observable<f64>)> = vec![
            (SystemSpec::FiniteCyclic(FiniteCyclic::uniform(7).unwrap()), random_weights(7, seed)),
            (SystemSpec::IrrationalRotation(Rotation::golden_mean()), Observable::rotation_eigenfunction()),
            (SystemSpec::BernoulliShift(Bernoulli::fair_sign()), Observable::sign()),
            (SystemSpec::SubstitutionSubshift(Substitution::thue_morse()), Observable::sign()),
            (SystemSpec::SubstitutionSubshift(Substitution::fibonacci()), Observable::indicator(0)),
        ];
        let (spec, f) = cases.into_iter().nth(which).unwrap();
        let phi = random_phi(radius, seed + 1);
        let x = spec.sample_invariant(seed, 64).unwrap();
        let lhs = nmap_apply(&phi.translate(1), &f, &spec, &x).unwrap();
        let rhs = nmap_apply(&phi, &f, &spec, &spec.shift(&x, 1).unwrap()).unwrap();
        let tol = if matches!(spec, SystemSpec::IrrationalRotation(_)) { 1e-12 } else { 0.0 };
        prop_assert!((lhs - rhs).norm() <= tol, "{} vs {}", lhs, rhs);
        // linearity
        let psi = random_phi(radius, seed + 2);
        let sum = nmap_apply(&(&phi + &psi), &f, &spec, &x).unwrap();
        let parts = nmap_apply(&phi, &f, &spec, &x).unwrap() + nmap_apply(&psi, &f, &spec, &x).unwrap();
        prop_assert!((sum - parts).norm() <= 1e-12);
    }
}
