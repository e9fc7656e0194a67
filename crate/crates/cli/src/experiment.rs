//! Config-driven runs: every number in the report is backed by a file in
//! the output directory. Wall-clock timings go to a separate
//! `timings.json` so the remaining artifacts are byte-identical across
//! reruns.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use koopman_diffraction::algebra::{wiener_pp_energy, TestFunction};
use koopman_diffraction::diffraction::{coefficient_distance, compare_measures, measure_with, SpectralSummary};
use koopman_diffraction::estimators::{n3_residual, orbit_autocorrelation, orbit_start, spectral_coefficients_mc};
use koopman_diffraction::io::{self, AtomRecord, MeasureFile};
use koopman_diffraction::mean_ap::{classify_discrete_spectrum, MeanApParams, Verdict};
use koopman_diffraction::rng::derive_seed;
use koopman_diffraction::systems::ObservableName;
use koopman_diffraction::{Complex, DiffractionParams, EstimatorParams, Observable, SystemConfig, WindowConvention};
use serde::{Deserialize, Serialize};

use crate::commands::{factor_checks, observable_seed, system_config, Check, CmdResult};
use crate::{Failure, ReportArgs};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "KOOPMAN_OUT_DIR";

/// A built-in name, a path to a system config, or an inline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemRef {
    Named(String),
    Inline(SystemConfig),
}

impl SystemRef {
    fn config(&self) -> anyhow::Result<SystemConfig> {
        match self {
            SystemRef::Named(n) => system_config(n),
            SystemRef::Inline(c) => Ok(c.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub max_lag: usize,
    pub orbit_length: usize,
    pub mc_samples: usize,
    #[serde(default = "lag_extended")]
    pub window: WindowConvention,
}

fn lag_extended() -> WindowConvention {
    WindowConvention::LagExtended
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanApConfig {
    pub horizon: usize,
    pub shift_range: usize,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub gap_bounds: Option<Vec<usize>>,
    #[serde(default = "one")]
    pub trials: usize,
}

fn one() -> usize {
    1
}

/// A test function as `[[n, value], ...]`.
pub type PairList = Vec<(i64, f64)>;

fn to_test_function(pairs: &PairList) -> TestFunction<f64> {
    TestFunction::from_pairs(&pairs.iter().map(|(n, v)| (*n, Complex::new(*v, 0.0))).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorConfig {
    #[serde(default = "default_phis")]
    pub test_functions: Vec<PairList>,
    #[serde(default = "default_samples")]
    pub correspondence_samples: usize,
}

fn default_phis() -> Vec<PairList> {
    vec![vec![(0, 1.0)], vec![(0, 1.0), (1, 1.0)]]
}

fn default_samples() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct N3Config {
    pub phi: PairList,
    pub psi: PairList,
}

/// Tolerance gates; the run exits 1 if any configured gate fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gates {
    /// Bound on `sup |c^{mc} − c^{orbit}|`; also used for the N3 and factor
    /// residuals unless set separately.
    #[serde(default = "default_tol")]
    pub coefficient_distance_max: f64,
    #[serde(default)]
    pub pp_energy_min: Option<f64>,
    #[serde(default)]
    pub pp_energy_max: Option<f64>,
    #[serde(default)]
    pub atom_count: Option<usize>,
    /// `[frequency, tolerance]`: some atom must lie this close.
    #[serde(default)]
    pub atom_near: Option<(f64, f64)>,
    #[serde(default)]
    pub n3_max: Option<f64>,
    #[serde(default)]
    pub factor_max: Option<f64>,
    #[serde(default)]
    pub verdict: Option<Verdict>,
}

fn default_tol() -> f64 {
    0.05
}

impl Default for Gates {
    fn default() -> Self {
        Gates {
            coefficient_distance_max: default_tol(),
            pp_energy_min: None,
            pp_energy_max: None,
            atom_count: None,
            atom_near: None,
            n3_max: None,
            factor_max: None,
            verdict: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root seed; mandatory, there is no entropy fallback.
    pub seed: u64,
    pub system: SystemRef,
    pub observables: Vec<String>,
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub diffraction: DiffractionParams,
    #[serde(default)]
    pub mean_ap: Option<MeanApConfig>,
    #[serde(default)]
    pub factor: Option<FactorConfig>,
    #[serde(default)]
    pub n3: Option<N3Config>,
    #[serde(default)]
    pub gates: Gates,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("kdiff-out")
}

#[derive(Debug, Serialize)]
pub struct ObservableReport {
    pub observable: String,
    pub seed: u64,
    pub orbit_start: String,
    pub files: BTreeMap<&'static str, String>,
    pub coefficient_distance: f64,
    pub measure_distance: serde_json::Value,
    pub pp_energy: f64,
    pub pp_energy_mc: f64,
    pub atoms: Vec<AtomRecord>,
    pub summary: serde_json::Value,
    pub n3_residual: f64,
    pub gates: Vec<Check>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub system: String,
    pub observables: Vec<ObservableReport>,
    pub classifier: Option<serde_json::Value>,
    pub pass: bool,
}

impl std::fmt::Debug for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}={} (≤ {}): {}", self.name, self.value, self.tolerance, self.pass)
    }
}

fn dir_name(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn rel(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).display().to_string()
}

fn gate_min(name: &str, value: f64, bound: f64) -> Check {
    Check { name: name.into(), value, tolerance: bound, pass: value >= bound }
}

/// Executes the pipeline for every observable and writes all artifacts.
pub fn run(config: &ExperimentConfig, out: &Path) -> anyhow::Result<(RunReport, BTreeMap<String, f64>)> {
    anyhow::ensure!(!config.observables.is_empty(), "at least one observable is required");
    let spec = config.system.config()?.build()?;
    let est = &config.estimator;
    let base = EstimatorParams::new(est.max_lag, est.orbit_length, est.mc_samples, config.seed).with_window(est.window);
    base.validate()?;
    let observables = config
        .observables
        .iter()
        .map(|n| ObservableName(n.clone()).resolve::<f64>(&spec))
        .collect::<Result<Vec<Observable<f64>>, _>>()?;
    let mean_ap = config.mean_ap.as_ref().map(|m| MeanApParams {
        horizon: m.horizon,
        shift_range: m.shift_range,
        epsilons: m.epsilons.clone(),
        gap_bounds: m.gap_bounds.clone(),
        trials: m.trials,
        seed: derive_seed(config.seed, "mean-ap", 0),
    });
    if let Some(p) = &mean_ap {
        p.validate()?;
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut timings = BTreeMap::new();
    let gates = &config.gates;
    let mut reports = Vec::new();
    for (name, f) in config.observables.iter().zip(&observables) {
        let clock = Instant::now();
        let params = EstimatorParams { seed: observable_seed(config.seed, name), ..base.clone() };
        let dir = out.join(dir_name(name));
        fs::create_dir_all(&dir)?;
        let mut files = BTreeMap::new();
        let x = orbit_start(&spec, &params)?;
        let orbit = orbit_autocorrelation(&spec, f, &x, &params)?;
        let mc = spectral_coefficients_mc(&spec, f, &params)?;
        for (key, file, seq) in [("orbit_coefficients", "orbit.csv", &orbit), ("mc_coefficients", "mc.csv", &mc)] {
            io::write_sequence_file(&dir.join(file), seq)?;
            files.insert(key, rel(out, &dir.join(file)));
        }
        let dm = measure_with(&orbit, &config.diffraction)?;
        let sm = measure_with(&mc, &config.diffraction)?;
        for (key, stem, m, prov) in [("diffraction_measure", "measure", &dm, "orbit"), ("spectral_measure", "spectral-measure", &sm, "monte-carlo")] {
            let mf = MeasureFile::from_measure(m, prov, &spec.name(), f.label());
            io::write_json(&dir.join(format!("{stem}.json")), &mf)?;
            io::write_density_csv(&mf, fs::File::create(dir.join(format!("{stem}.csv")))?)?;
            files.insert(key, rel(out, &dir.join(format!("{stem}.json"))));
        }
        let distance = compare_measures(&dm, &sm, params.max_lag)?;
        let cdist = coefficient_distance(&orbit, &mc);
        let pp = wiener_pp_energy(&orbit);
        let summary = SpectralSummary::of(&orbit, &dm, config.diffraction.atom_threshold);
        let (phi, psi) = match &config.n3 {
            Some(n) => (to_test_function(&n.phi), to_test_function(&n.psi)),
            None => (TestFunction::delta(0), TestFunction::delta(1)),
        };
        let n3 = n3_residual(&orbit, &phi, &psi, &spec, f, &params)?;
        let mut fchecks = Vec::new();
        if let Some(fc) = &config.factor {
            let phis: Vec<_> = fc.test_functions.iter().map(to_test_function).collect();
            let tol = gates.factor_max.unwrap_or(gates.coefficient_distance_max);
            fchecks = factor_checks(&spec, f, &params, &phis, tol, fc.correspondence_samples)?;
            let fac = koopman_diffraction::factors::factor_autocorrelation(&spec, f, &params)?;
            io::write_sequence_file(&dir.join("factor.csv"), &fac)?;
            files.insert("factor_coefficients", rel(out, &dir.join("factor.csv")));
        }
        let mut g = vec![Check::at_most("coefficient-distance", cdist, gates.coefficient_distance_max)];
        g.push(Check::at_most("n3-residual", n3, gates.n3_max.unwrap_or(gates.coefficient_distance_max)));
        if let Some(lo) = gates.pp_energy_min {
            g.push(gate_min("pp-energy-min", pp, lo));
        }
        if let Some(hi) = gates.pp_energy_max {
            g.push(Check::at_most("pp-energy-max", pp, hi));
        }
        if let Some(n) = gates.atom_count {
            let count = dm.atoms.len();
            g.push(Check { name: "atom-count".into(), value: count as f64, tolerance: n as f64, pass: count == n });
        }
        if let Some((xi, tol)) = gates.atom_near {
            let d = dm.atoms.iter().map(|a| koopman_diffraction::scalar::circle_distance(a.frequency, xi)).fold(f64::INFINITY, f64::min);
            g.push(Check::at_most("atom-near", d, tol));
        }
        g.extend(fchecks.into_iter().map(|c| Check { name: format!("factor:{}", c.name), ..c }));
        timings.insert(format!("observable:{name}"), clock.elapsed().as_secs_f64());
        reports.push(ObservableReport {
            observable: name.clone(),
            seed: params.seed,
            orbit_start: x.describe(),
            files: files.into_iter().collect(),
            coefficient_distance: cdist,
            measure_distance: serde_json::to_value(distance)?,
            pp_energy: pp,
            pp_energy_mc: wiener_pp_energy(&mc),
            atoms: dm.atoms.iter().map(|a| AtomRecord { frequency: a.frequency, mass: a.mass }).collect(),
            summary: serde_json::to_value(summary)?,
            n3_residual: n3,
            gates: g,
        });
    }
    let mut classifier = None;
    let mut verdict_ok = true;
    if let Some(p) = &mean_ap {
        let clock = Instant::now();
        let r = classify_discrete_spectrum(&spec, &observables, p)?;
        io::write_json(&out.join("verdict.json"), &r)?;
        if let Some(expected) = gates.verdict {
            verdict_ok = r.overall == expected;
        }
        classifier = Some(serde_json::json!({
            "file": "verdict.json",
            "overall": r.overall,
            "expected": gates.verdict,
            "pass": verdict_ok,
            "observables": r.observables.iter().map(|o| serde_json::json!({"observable": o.observable, "verdict": o.verdict})).collect::<Vec<_>>(),
        }));
        timings.insert("classifier".into(), clock.elapsed().as_secs_f64());
    }
    let pass = verdict_ok && reports.iter().all(|r| r.gates.iter().all(|g| g.pass));
    let report = RunReport { config: config.clone(), system: spec.name(), observables: reports, classifier, pass };
    io::write_json(&out.join("report.json"), &report)?;
    io::write_json(&out.join("timings.json"), &timings)?;
    Ok((report, timings))
}

/// Output directory: environment override, then flag, then config.
pub fn output_dir(config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    flag.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir.clone())
}

pub fn report(a: &ReportArgs) -> CmdResult {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    let out = output_dir(&config, a.out_dir.as_deref());
    let (report, _) = run(&config, &out)?;
    let failed: Vec<String> = report
        .observables
        .iter()
        .flat_map(|o| o.gates.iter().filter(|g| !g.pass).map(move |g| format!("{}: {:?}", o.observable, g)))
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::json!({
            "report": out.join("report.json"),
            "pass": report.pass,
            "failed_gates": failed,
            "classifier": report.classifier.as_ref().map(|c| c["overall"].clone()),
        }))?
    );
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("{} gate(s) failed", failed.len().max(1))))
    }
}
