//! The pipeline instantiated at `f32`.

use koopman_diffraction::algebra::wiener_pp_energy;
use koopman_diffraction::diffraction::{measure_with, spectrum_report};
use koopman_diffraction::estimators::{orbit_coefficients, spectral_coefficients_mc};
use koopman_diffraction::mean_ap::{classify_discrete_spectrum, MeanApParams};
use koopman_diffraction::systems::ObservableName;
use koopman_diffraction::{DiffractionParams, EstimatorParams, ObservableF32, SystemConfig, Verdict, WindowConvention};

fn setup(system: &str, observable: &str) -> (koopman_diffraction::SystemSpec, ObservableF32) {
    let spec = SystemConfig::builtin(system).unwrap().build().unwrap();
    let f = ObservableName(observable.into()).resolve::<f32>(&spec).unwrap();
    (spec, f)
}

#[test]
fn rotation_atom_in_f32() {
    let (spec, f) = setup("rotation", "character");
    let p = EstimatorParams::new(200, 20_000, 100, 1).with_window(WindowConvention::LagExtended);
    let c = orbit_coefficients(&spec, &f, &p).unwrap();
    let m = measure_with(&c, &DiffractionParams::default()).unwrap();
    assert_eq!(m.atoms.len(), 1);
    let alpha = (5f32.sqrt() - 1.0) / 2.0;
    assert!((m.atoms[0].frequency - alpha).abs() < 1e-3);
    assert!((m.atoms[0].mass - 1.0).abs() < 0.02);
    assert!((wiener_pp_energy(&c) - 1.0).abs() < 0.02);
}

#[test]
fn bernoulli_report_in_f32() {
    let (spec, f) = setup("bernoulli", "sign");
    let p = EstimatorParams::new(20, 20_000, 5000, 2);
    let r = spectrum_report(&spec, &f, &p, &DiffractionParams::default()).unwrap();
    assert!(r.coefficient_distance < 0.08);
    assert!(r.diffraction.atoms.is_empty());
    let mc = spectral_coefficients_mc(&spec, &f, &p).unwrap();
    assert!((mc.c0() - 1.0).abs() < 1e-5);
}

#[test]
fn classifier_in_f32() {
    let (spec, f) = setup("rotation", "character");
    let p = MeanApParams { seed: 3, ..MeanApParams::new(20_000, 500, vec![0.5, 0.2]) };
    let r = classify_discrete_spectrum(&spec, &[f], &p).unwrap();
    assert_eq!(r.overall, Verdict::ConsistentWithDiscrete);
}
