//! End-to-end acceptance checks. Runs as a plain binary (`harness = false`)
//! and prints one `criterion N: PASS|FAIL` line per item; exits nonzero if
//! any item fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use koopman_diffraction::algebra::{wiener_pp_energy, TestFunction};
use koopman_diffraction::diffraction::{coefficient_distance, measure_with, spectrum_report};
use koopman_diffraction::estimators::{
    empirical_autocorrelation, exact_coefficients_finite, n3_residual, orbit_coefficients, spectral_coefficients_mc,
};
use koopman_diffraction::factors::{factor_autocorrelation, tmds_factor_identity_residual};
use koopman_diffraction::io;
use koopman_diffraction::mean_ap::{classify_discrete_spectrum, MeanApParams};
use koopman_diffraction::rng::stream;
use koopman_diffraction::systems::ObservableName;
use koopman_diffraction::{
    Complex, DiffractionParams, EstimatorParams, Observable, PosDefSequence, SampledSignal, SystemConfig, SystemSpec,
    Verdict, WindowConvention,
};
use rand::Rng;

type C = Complex<f64>;
type Seq = PosDefSequence<f64>;

/// Sequences produced along the way, with whether they came from an exact path.
type Produced = Vec<(String, Seq, bool)>;

type Outcome = Result<String, String>;

fn system(name: &str) -> SystemSpec {
    SystemConfig::builtin(name).unwrap().build().unwrap()
}

fn observable(spec: &SystemSpec, name: &str) -> Observable<f64> {
    ObservableName(name.into()).resolve(spec).unwrap()
}

fn params(k: usize, n: usize, m: usize, seed: u64) -> EstimatorParams {
    EstimatorParams::new(k, n, m, seed).with_window(WindowConvention::LagExtended)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Thue–Morse ±1 autocorrelation by its two-scale recursion.
fn thue_morse_eta(max: usize) -> Vec<f64> {
    let mut eta = vec![0.0; 2 * max + 2];
    eta[0] = 1.0;
    // η(1) = −(η(0) + η(1))/2
    eta[1] = -1.0 / 3.0;
    for n in 2..eta.len() {
        eta[n] = if n % 2 == 0 { eta[n / 2] } else { -(eta[n / 2] + eta[n / 2 + 1]) / 2.0 };
    }
    eta.truncate(max + 1);
    eta
}

fn criterion_1(produced: &mut Produced) -> Outcome {
    let cases = [
        ("rotation", "character"),
        ("bernoulli", "sign"),
        ("thue-morse", "sign"),
        ("fibonacci", "centered-indicator:a"),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, (sys, obs)) in cases.iter().enumerate() {
        let spec = system(sys);
        let f = observable(&spec, obs);
        let p = params(50, 100_000, 100_000, 1000 + i as u64);
        let orbit = orbit_coefficients(&spec, &f, &p).unwrap();
        let mc = spectral_coefficients_mc(&spec, &f, &p).unwrap();
        let d = coefficient_distance(&orbit, &mc);
        worst = worst.max(d);
        parts.push(format!("{sys}={d:.4}"));
        produced.push((format!("{sys}/orbit"), orbit, false));
        produced.push((format!("{sys}/mc"), mc, false));
    }
    check(worst <= 0.05, format!("sup|c_mc − c_orbit| {} (≤ 0.05)", parts.join(" ")))
}

fn random_test_function(rng: &mut impl Rng, radius: i64) -> TestFunction<f64> {
    TestFunction::new(-radius, (0..2 * radius + 1).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
}

fn criterion_2(produced: &mut Produced) -> Outcome {
    let spec = system("cyclic");
    let mut rng = stream(2, "acceptance-cyclic", 0);
    let (mut coeff, mut n3, mut tmds) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..100 {
        let weights: Vec<C> = (0..12).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = Observable::letter_weights(weights);
        let p = params(10, 120, 100, i);
        let orbit = orbit_coefficients(&spec, &f, &p).unwrap();
        let exact = exact_coefficients_finite(&spec, &f, 10).unwrap();
        coeff = coeff.max(coefficient_distance(&orbit, &exact));
        let phi = random_test_function(&mut rng, 3);
        let psi = random_test_function(&mut rng, 3);
        n3 = n3.max(n3_residual(&exact, &phi, &psi, &spec, &f, &p).unwrap());
        tmds = tmds.max(tmds_factor_identity_residual(&spec, &f, &phi, &p).unwrap());
        if i < 5 {
            produced.push((format!("cyclic/{i}/orbit"), orbit, true));
            produced.push((format!("cyclic/{i}/exact"), exact, true));
        }
    }
    check(
        coeff <= 1e-12 && n3 <= 1e-12 && tmds <= 1e-12,
        format!("coefficients {coeff:.1e}, N3 {n3:.1e}, factor identity {tmds:.1e} (all ≤ 1e-12)"),
    )
}

fn criterion_3(produced: &mut Produced) -> Outcome {
    let spec = system("rotation");
    let f = observable(&spec, "character");
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let c = orbit_coefficients(&spec, &f, &params(10_000, 100_000, 100, 3)).unwrap();
    let m = measure_with(&c, &DiffractionParams::default()).unwrap();
    let pp = wiener_pp_energy(&c);
    let atom = m.atoms.iter().min_by(|a, b| (a.frequency - alpha).abs().total_cmp(&(b.frequency - alpha).abs()));
    produced.push(("rotation/K=1e4".into(), c, false));
    let Some(atom) = atom else {
        return Err("no atom detected".into());
    };
    let ok = (atom.frequency - alpha).abs() <= 1e-3 && (0.98..=1.02).contains(&atom.mass) && (0.98..=1.02).contains(&pp);
    check(ok, format!("atom at {:.6} (α = {alpha:.6}) mass {:.4}; pp energy {pp:.4}", atom.frequency, atom.mass))
}

fn criterion_4(produced: &mut Produced) -> Outcome {
    let spec = system("bernoulli");
    let f = observable(&spec, "sign");
    let n = 100_000;
    let c = orbit_coefficients(&spec, &f, &params(1000, n, 100, 4)).unwrap();
    let bound = 5.0 / (n as f64).sqrt();
    let small = (1..=50).filter(|&k| c.at(k).norm() <= bound).count() as f64 / 50.0;
    let pp = wiener_pp_energy(&c);
    let dp = DiffractionParams { kernel_order: Some(200), ..DiffractionParams::default() };
    let m = measure_with(&c, &dp).unwrap();
    let flat = m.density.iter().filter(|d| (0.8..=1.2).contains(*d)).count() as f64 / m.density.len() as f64;
    produced.push(("bernoulli/K=1000".into(), c, false));
    check(
        small >= 0.95 && pp <= 0.01 && flat >= 0.95,
        format!("{:.0}% of lags ≤ 5/√N, pp energy {pp:.5}, {:.1}% of bins in [0.8, 1.2]", small * 100.0, flat * 100.0),
    )
}

fn criterion_5(produced: &mut Produced) -> Outcome {
    let spec = system("thue-morse");
    let f = observable(&spec, "sign");
    let c = orbit_coefficients(&spec, &f, &params(1000, 1 << 20, 100, 5)).unwrap();
    let eta = thue_morse_eta(50);
    let sup = (-50i64..=50).map(|n| (c.at(n) - C::new(eta[n.unsigned_abs() as usize], 0.0)).norm()).fold(0.0, f64::max);
    let c1 = (c.at(1).re + 1.0 / 3.0).abs();
    let pp = wiener_pp_energy(&c);
    let m = measure_with(&c, &DiffractionParams::default()).unwrap();
    produced.push(("thue-morse/N=2^20".into(), c, false));
    check(
        c1 <= 5e-3 && sup <= 5e-3 && pp <= 0.02 && m.atoms.is_empty(),
        format!("|c_1 + 1/3| {c1:.1e}, sup vs recursion {sup:.1e}, pp energy {pp:.4}, {} atoms", m.atoms.len()),
    )
}

fn criterion_6(produced: &mut Produced) -> Outcome {
    let cyc = system("cyclic");
    let mut rng = stream(6, "acceptance-factor", 0);
    let mut exact: f64 = 0.0;
    for i in 0..20 {
        let f = Observable::letter_weights((0..12).map(|_| C::new(rng.random_range(-1.0..1.0), 0.0)).collect());
        let p = params(10, 120, 100, 600 + i);
        let fac = factor_autocorrelation(&cyc, &f, &p).unwrap();
        exact = exact.max(coefficient_distance(&fac, &orbit_coefficients(&cyc, &f, &p).unwrap()));
    }
    let mut parts = vec![format!("cyclic {exact:.1e}")];
    let mut sampled: f64 = 0.0;
    for (sys, obs) in [("rotation", "character"), ("thue-morse", "sign")] {
        let spec = system(sys);
        let f = observable(&spec, obs);
        let p = params(50, 100_000, 100, 66);
        let fac = factor_autocorrelation(&spec, &f, &p).unwrap();
        let d = coefficient_distance(&fac, &orbit_coefficients(&spec, &f, &p).unwrap());
        sampled = sampled.max(d);
        parts.push(format!("{sys} {d:.1e}"));
        produced.push((format!("{sys}/factor"), fac, false));
    }
    check(exact <= 1e-12 && sampled <= 0.02, format!("factor vs direct: {}", parts.join(", ")))
}

fn criterion_7(produced: &Produced) -> Outcome {
    let mut rng = stream(7, "acceptance-pd", 0);
    let mut worst = (f64::INFINITY, String::new());
    let mut failures = Vec::new();
    let trials: Vec<TestFunction<f64>> = (0..1000)
        .map(|_| {
            let r = rng.random_range(0..=16);
            let phi = random_test_function(&mut rng, r);
            phi.scale(C::new(1.0 / phi.l2_norm_sqr().sqrt(), 0.0))
        })
        .collect();
    for (name, c, exact) in produced {
        let tol = if *exact { 1e-9 } else { 1e-6 } * c.c0();
        let k = c.max_lag() as i64;
        let min = trials
            .iter()
            .filter(|phi| 2 * phi.radius() <= k)
            .map(|phi| c.quadratic_form(phi).unwrap() / c.c0())
            .fold(f64::INFINITY, f64::min);
        if min < worst.0 {
            worst = (min, name.clone());
        }
        if min * c.c0() < -tol {
            failures.push(name.clone());
        }
    }
    check(
        failures.is_empty(),
        format!("{} sequences × 1000 test functions; min Q/c_0 = {:.3e} ({}); failures: {:?}", produced.len(), worst.0, worst.1, failures),
    )
}

fn criterion_8() -> Outcome {
    let cases = [
        ("rotation", "character", Verdict::ConsistentWithDiscrete),
        ("fibonacci", "centered-indicator:a", Verdict::ConsistentWithDiscrete),
        ("bernoulli", "sign", Verdict::NotMeanAp),
        ("thue-morse", "sign", Verdict::NotMeanAp),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (sys, obs, expected) in cases {
        let spec = system(sys);
        let f = observable(&spec, obs);
        let p = MeanApParams { seed: 8, ..MeanApParams::new(100_000, 1000, vec![0.5, 0.2, 0.1]) };
        let r = classify_discrete_spectrum(&spec, &[f], &p).unwrap();
        ok &= r.overall == expected;
        parts.push(format!("{sys}={:?}", r.overall));
    }
    check(ok, parts.join(", "))
}

fn criterion_9() -> Outcome {
    let mut rng = stream(9, "acceptance-perf", 0);
    let big: Vec<C> = (0..1_000_000).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let signal = SampledSignal::new(big);
    let start = Instant::now();
    let c = empirical_autocorrelation(&signal, 1000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(c.max_lag(), 1000);

    let small: Vec<C> = signal.values[..10_000].to_vec();
    let c = empirical_autocorrelation(&SampledSignal::new(small.clone()), 1000).unwrap();
    let n = small.len();
    let mut rel: f64 = 0.0;
    for k in 0..=1000usize {
        let naive = (0..n - k).fold(C::new(0.0, 0.0), |a, i| a + small[i + k] * small[i].conj()) / n as f64;
        rel = rel.max((c.at(k as i64) - naive).norm() / naive.norm().max(c.c0() * 1e-3));
    }
    check(secs < 2.0 && rel <= 1e-10, format!("N = 1e6, K = 1e3 in {secs:.3} s (< 2 s); relative error vs naive {rel:.1e}"))
}

/// Every artifact of a small multi-system run, serialized.
fn artifacts(seed: u64) -> HashMap<String, Vec<u8>> {
    let mut out = HashMap::new();
    for (sys, obs) in [("rotation", "character"), ("thue-morse", "sign"), ("bernoulli", "sign")] {
        let spec = system(sys);
        let f = observable(&spec, obs);
        let p = params(40, 20_000, 5000, seed);
        let r = spectrum_report(&spec, &f, &p, &DiffractionParams::default()).unwrap();
        let mut buf = Vec::new();
        io::write_sequence_csv(&r.orbit, &mut buf).unwrap();
        out.insert(format!("{sys}/orbit.csv"), buf);
        let mut buf = Vec::new();
        io::write_sequence_csv(&r.mc, &mut buf).unwrap();
        out.insert(format!("{sys}/mc.csv"), buf);
        let measures = (
            io::MeasureFile::from_measure(&r.diffraction, "orbit", sys, obs),
            io::MeasureFile::from_measure(&r.spectral, "monte-carlo", sys, obs),
            r.distance,
            r.coefficient_distance,
        );
        out.insert(format!("{sys}/measures.json"), serde_json::to_vec(&measures).unwrap());
        let mp = MeanApParams { seed, ..MeanApParams::new(20_000, 500, vec![0.5, 0.2]) };
        let v = classify_discrete_spectrum(&spec, &[f], &mp).unwrap();
        out.insert(format!("{sys}/verdict.json"), serde_json::to_vec(&v).unwrap());
    }
    out
}

fn criterion_10() -> Outcome {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| artifacts(10))
    };
    let one = run(1);
    let four = run(4);
    let again = run(4);
    let differing: Vec<&String> = one.keys().filter(|k| one[*k] != four[*k] || four[*k] != again[*k]).collect();
    check(
        differing.is_empty() && one.len() == 12,
        format!("{} artifacts compared across 1/4/4 worker threads; differing: {:?}", one.len(), differing),
    )
}

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("criterion {n}: PASS [{secs:.1}s] {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {n}: FAIL [{secs:.1}s] {detail}");
            false
        }
    }
}

fn main() {
    let mut produced = Produced::new();
    let mut results = vec![
        run(1, || criterion_1(&mut produced)),
        run(2, || criterion_2(&mut produced)),
        run(3, || criterion_3(&mut produced)),
        run(4, || criterion_4(&mut produced)),
        run(5, || criterion_5(&mut produced)),
        run(6, || criterion_6(&mut produced)),
    ];
    results.push(run(7, || criterion_7(&produced)));
    results.push(run(8, criterion_8));
    results.push(run(9, criterion_9));
    results.push(run(10, criterion_10));
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
