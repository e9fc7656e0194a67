//! One function per subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use koopman_diffraction::diffraction::{coefficient_distance, compare_measures, measure_with, DiffractionParams};
use koopman_diffraction::estimators::{
    exact_coefficients_finite, orbit_autocorrelation, orbit_start, spectral_coefficients_mc, EstimatorParams,
    WindowConvention,
};
use koopman_diffraction::factors::{
    base_window_start, correspondence_check, factor_autocorrelation, factor_autocorrelation_at,
    tmds_factor_identity_residual,
};
use koopman_diffraction::io::{self, MeasureFile};
use koopman_diffraction::mean_ap::{classify_discrete_spectrum, MeanApParams};
use koopman_diffraction::rng::derive_seed;
use koopman_diffraction::systems::{builtin_names, observable_names, ObservableName};
use koopman_diffraction::{Observable, SystemConfig, SystemSpec, TestFunction};
use serde::Serialize;

use crate::{AutocorrArgs, ClassifyArgs, CompareArgs, EstimatorArgs, FactorArgs, Failure, SampleArgs, SpectrumArgs};

pub type CmdResult = Result<(), Failure>;

/// A built-in name, or a path to a JSON [`SystemConfig`].
pub fn system_config(name: &str) -> anyhow::Result<SystemConfig> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading system config {name}"))?;
        return serde_json::from_str(&text).with_context(|| format!("parsing system config {name}"));
    }
    Ok(SystemConfig::builtin(name)?)
}

pub fn resolve_system(name: &str) -> anyhow::Result<SystemSpec> {
    Ok(system_config(name)?.build()?)
}

pub fn parse_window(s: &str) -> anyhow::Result<WindowConvention> {
    match s {
        "biased" => Ok(WindowConvention::Biased),
        "lag-extended" => Ok(WindowConvention::LagExtended),
        _ => bail!("unknown window convention '{s}' (expected biased or lag-extended)"),
    }
}

/// Seed of one observable's estimator streams. Keyed by name so that adding
/// observables leaves the others untouched.
pub fn observable_seed(root: u64, observable: &str) -> u64 {
    derive_seed(root, &format!("observable:{observable}"), 0)
}

fn estimator_params(est: &EstimatorArgs, root: u64) -> anyhow::Result<EstimatorParams> {
    let params = EstimatorParams::new(est.lags, est.orbit, est.mc.unwrap_or(100), observable_seed(root, &est.observable))
        .with_window(parse_window(&est.window)?);
    params.validate()?;
    Ok(params)
}

fn print_json<S: Serialize>(value: &S) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// `<dir>/<stem>-mc.csv` for `<dir>/<stem>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("coeffs");
    path.with_file_name(format!("{stem}-{suffix}.csv"))
}

pub fn list_systems(json: bool) -> CmdResult {
    let systems: Vec<serde_json::Value> = builtin_names()
        .iter()
        .map(|n| {
            let cfg = SystemConfig::builtin(n).expect("built-in");
            serde_json::json!({"name": n, "default": cfg, "schema": cfg.schema()})
        })
        .collect();
    if json {
        print_json(&serde_json::json!({"systems": systems, "observables": observable_names()}))?;
    } else {
        println!("systems:");
        for s in &systems {
            println!("  {:<16} {}", s["name"].as_str().unwrap_or(""), s["schema"]);
        }
        println!("observables:");
        for o in observable_names() {
            println!("  {o}");
        }
    }
    Ok(())
}

pub fn sample(a: &SampleArgs) -> CmdResult {
    let spec = resolve_system(&a.sys.system)?;
    let f: Observable<f64> = ObservableName(a.observable.clone()).resolve(&spec)?;
    let params = EstimatorParams::new(0, a.length, 100, observable_seed(a.sys.seed, &a.observable));
    let x = orbit_start(&spec, &params)?;
    let s = spec.orbit_samples(&f, &x, a.length)?;
    let mut w = String::from("n,re,im\n");
    for (n, z) in s.values.iter().enumerate() {
        w.push_str(&format!("{n},{:?},{:?}\n", z.re + 0.0, z.im + 0.0));
    }
    fs::write(&a.out, w)?;
    print_json(&serde_json::json!({"system": spec.name(), "observable": f.label(), "start": s.origin, "length": s.len()}))?;
    Ok(())
}

pub fn autocorr(a: &AutocorrArgs) -> CmdResult {
    let spec = resolve_system(&a.sys.system)?;
    let f: Observable<f64> = ObservableName(a.est.observable.clone()).resolve(&spec)?;
    let params = estimator_params(&a.est, a.sys.seed)?;
    let x = orbit_start(&spec, &params)?;
    let orbit = orbit_autocorrelation(&spec, &f, &x, &params)?;
    io::write_sequence_file(&a.out, &orbit)?;
    let mut summary = serde_json::json!({
        "system": spec.name(), "observable": f.label(), "start": x.describe(),
        "orbit_coefficients": a.out,
    });
    if a.est.mc.is_some() {
        let mc = spectral_coefficients_mc(&spec, &f, &params)?;
        let path = sibling(&a.out, "mc");
        io::write_sequence_file(&path, &mc)?;
        summary["mc_coefficients"] = serde_json::json!(path);
        summary["coefficient_distance"] = serde_json::json!(coefficient_distance(&orbit, &mc));
    }
    print_json(&summary)?;
    Ok(())
}

fn write_measure(dir: &Path, name: &str, file: &MeasureFile) -> anyhow::Result<()> {
    io::write_json(&dir.join(format!("{name}.json")), file)?;
    io::write_density_csv(file, fs::File::create(dir.join(format!("{name}.csv")))?)?;
    Ok(())
}

pub fn spectrum(a: &SpectrumArgs) -> CmdResult {
    let spec = resolve_system(&a.sys.system)?;
    let f: Observable<f64> = ObservableName(a.est.observable.clone()).resolve(&spec)?;
    let params = estimator_params(&a.est, a.sys.seed)?;
    let dp = DiffractionParams { grid: a.grid, kernel_order: a.kernel_order, atom_threshold: a.tau, background_correction: true };
    ensure_dir(&a.out_dir)?;
    let x = orbit_start(&spec, &params)?;
    let orbit = orbit_autocorrelation(&spec, &f, &x, &params)?;
    let dm = measure_with(&orbit, &dp)?;
    io::write_sequence_file(&a.out_dir.join("orbit.csv"), &orbit)?;
    let mfile = MeasureFile::from_measure(&dm, "orbit", &spec.name(), f.label());
    write_measure(&a.out_dir, "measure", &mfile)?;
    let mut summary = serde_json::json!({
        "system": spec.name(), "observable": f.label(), "start": x.describe(),
        "pp_energy": koopman_diffraction::algebra::wiener_pp_energy(&orbit),
        "atoms": mfile.atoms, "measure": "measure.json",
    });
    if a.est.mc.is_some() {
        let mc = spectral_coefficients_mc(&spec, &f, &params)?;
        let sm = measure_with(&mc, &dp)?;
        io::write_sequence_file(&a.out_dir.join("mc.csv"), &mc)?;
        write_measure(&a.out_dir, "spectral-measure", &MeasureFile::from_measure(&sm, "monte-carlo", &spec.name(), f.label()))?;
        summary["distance"] = serde_json::to_value(compare_measures(&dm, &sm, params.max_lag)?)?;
        summary["coefficient_distance"] = serde_json::json!(coefficient_distance(&orbit, &mc));
        summary["spectral_measure"] = serde_json::json!("spectral-measure.json");
    }
    io::write_json(&a.out_dir.join("spectrum.json"), &summary)?;
    print_json(&summary)?;
    Ok(())
}

pub fn compare(a: &CompareArgs) -> CmdResult {
    let load = |p: &Path| -> anyhow::Result<_> {
        let file: MeasureFile = io::read_json(p).with_context(|| format!("reading {}", p.display()))?;
        file.to_measure().with_context(|| format!("validating {}", p.display()))
    };
    let (ma, mb) = (load(&a.a)?, load(&a.b)?);
    let lags = a.lags.unwrap_or(ma.max_lag.min(mb.max_lag));
    let d = compare_measures(&ma, &mb, lags)?;
    let pass = d.coeff_sup_distance <= a.tol;
    print_json(&serde_json::json!({
        "coeff_sup_distance": d.coeff_sup_distance, "cdf_distance": d.cdf_distance,
        "lag_horizon": lags, "tol": a.tol, "pass": pass,
    }))?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("coefficient distance {} exceeds {}", d.coeff_sup_distance, a.tol)))
    }
}

/// `n:v,n:v` with real or `re+imi`-free values; several functions are
/// separated by `;`.
pub fn parse_test_functions(s: &str) -> anyhow::Result<Vec<TestFunction<f64>>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let pairs = part
                .split(',')
                .map(|kv| {
                    let (n, v) = kv.split_once(':').ok_or_else(|| anyhow!("expected n:v, got '{kv}'"))?;
                    let n: i64 = n.trim().parse().with_context(|| format!("bad index '{n}'"))?;
                    let v: f64 = v.trim().parse().with_context(|| format!("bad value '{v}'"))?;
                    Ok((n, koopman_diffraction::Complex::new(v, 0.0)))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(TestFunction::from_pairs(&pairs))
        })
        .collect()
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

/// Factor identities for one observable: factor-side vs direct
/// autocorrelation, the TMDS identity per test function, and the
/// correspondence `δ_0 ∘ Φ^f = f`.
pub fn factor_checks(
    spec: &SystemSpec,
    f: &Observable<f64>,
    params: &EstimatorParams,
    phis: &[TestFunction<f64>],
    tol: f64,
    samples: usize,
) -> anyhow::Result<Vec<Check>> {
    let exact = matches!(spec, SystemSpec::FiniteCyclic(_));
    let tol = if exact { 1e-12 } else { tol };
    let mut checks = Vec::new();
    // same data, two code paths
    let x = orbit_start(spec, params)?;
    let fac = factor_autocorrelation_at(spec, f, &x, params)?;
    let direct = orbit_autocorrelation(spec, f, &base_window_start(spec, &x, params)?, params)?;
    checks.push(Check::at_most("factor-vs-direct-same-window", coefficient_distance(&fac, &direct), 1e-12));
    let reference = if exact {
        exact_coefficients_finite(spec, f, params.max_lag)?
    } else {
        spectral_coefficients_mc(spec, f, params)?
    };
    let sampled = factor_autocorrelation(spec, f, params)?;
    checks.push(Check::at_most("factor-autocorrelation", coefficient_distance(&sampled, &reference), tol));
    for (i, phi) in phis.iter().enumerate() {
        let r = tmds_factor_identity_residual(spec, f, phi, params)?;
        checks.push(Check::at_most(format!("tmds-identity[{i}]"), r, tol));
    }
    let ok = correspondence_check(spec, f, samples, derive_seed(params.seed, "correspondence", 0))?;
    checks.push(Check { name: "correspondence".into(), value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok });
    Ok(checks)
}

pub fn factor_check(a: &FactorArgs) -> CmdResult {
    let spec = resolve_system(&a.sys.system)?;
    let f: Observable<f64> = ObservableName(a.est.observable.clone()).resolve(&spec)?;
    let params = estimator_params(&a.est, a.sys.seed)?;
    let phis = parse_test_functions(&a.phi)?;
    let checks = factor_checks(&spec, &f, &params, &phis, a.tol, a.samples)?;
    let pass = checks.iter().all(|c| c.pass);
    let report = serde_json::json!({"system": spec.name(), "observable": f.label(), "checks": checks, "pass": pass});
    io::write_json(&a.out, &report)?;
    print_json(&report)?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Tolerance("factor identity check failed".into()))
    }
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',').map(|x| x.trim().parse::<T>().with_context(|| format!("bad list entry '{x}'"))).collect()
}

pub fn classify(a: &ClassifyArgs) -> CmdResult {
    let spec = resolve_system(&a.sys.system)?;
    let observables = a
        .observables
        .split(',')
        .map(|n| ObservableName(n.trim().into()).resolve::<f64>(&spec))
        .collect::<Result<Vec<_>, _>>()?;
    let params = MeanApParams {
        horizon: a.horizon,
        shift_range: a.shift_range.unwrap_or(a.horizon / 20),
        epsilons: parse_list(&a.eps)?,
        gap_bounds: None,
        trials: a.trials,
        seed: a.sys.seed,
    };
    let report = classify_discrete_spectrum(&spec, &observables, &params)?;
    io::write_json(&a.out, &report)?;
    print_json(&serde_json::json!({
        "system": report.system, "overall": report.overall,
        "observables": report.observables.iter().map(|o| serde_json::json!({"observable": o.observable, "verdict": o.verdict})).collect::<Vec<_>>(),
    }))?;
    Ok(())
}
