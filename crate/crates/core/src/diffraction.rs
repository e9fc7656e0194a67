//! From coefficient windows to measures on the torus: atom extraction,
//! Fejér inversion of the remainder, and distances between measures.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::{atom_scan, bochner_density, wiener_pp_energy, Atom, PosDefSequence, TorusMeasure};
use crate::error::{precondition, Error, Result};
use crate::estimators::{orbit_autocorrelation, orbit_start, spectral_coefficients_mc, EstimatorParams};
use crate::scalar::{turn, Real};
use crate::systems::{Observable, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffractionParams {
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Fejér order `L`; defaults to the full lag window.
    #[serde(default)]
    pub kernel_order: Option<usize>,
    /// Atom threshold as a fraction of `c_0`.
    #[serde(default = "default_tau")]
    pub atom_threshold: f64,
    #[serde(default = "yes")]
    pub background_correction: bool,
}

fn default_grid() -> usize {
    4096
}

fn default_tau() -> f64 {
    0.05
}

fn yes() -> bool {
    true
}

impl Default for DiffractionParams {
    fn default() -> Self {
        DiffractionParams { grid: default_grid(), kernel_order: None, atom_threshold: default_tau(), background_correction: true }
    }
}

impl DiffractionParams {
    /// Kernel order and grid actually used for a window of `max_lag` lags.
    pub fn resolve(&self, max_lag: usize) -> (usize, usize) {
        let l = self.kernel_order.unwrap_or(max_lag).min(max_lag);
        (l, self.grid.max((4 * l).max(4).next_power_of_two()))
    }
}

/// Removes the contribution of a flat background from Wiener atom masses.
///
/// A Wiener average at an atom also collects `D(ξ)/(2K+1)` from the
/// continuous part. With the background modelled as flat at level
/// `B = c_0 − Σm`, the corrected masses solve
/// `m_j = m̂_j − B/(2K+1)` jointly; atoms driven to zero are dropped.
fn correct_background<T: Real>(atoms: Vec<Atom<T>>, c0: T, max_lag: usize) -> Vec<Atom<T>> {
    let width = T::from_usize_lossy(2 * max_lag + 1);
    let raw: T = atoms.iter().fold(T::zero(), |a, x| a + x.mass);
    let count = T::from_usize_lossy(atoms.len());
    if atoms.is_empty() || count >= width {
        return atoms;
    }
    let level = ((c0 - raw) / (T::one() - count / width)).max(T::zero());
    atoms
        .into_iter()
        .map(|a| Atom { frequency: a.frequency, mass: a.mass - level / width })
        .filter(|a| a.mass > T::zero())
        .collect()
}

/// Decomposes a coefficient window into atoms plus a Fejér-smoothed density.
///
/// Atoms come from [`atom_scan`] with threshold `τ` (absolute). Their
/// exponentials are subtracted from the window and the remainder is inverted
/// with the Fejér kernel of order `L`. Negative density samples are clipped
/// to zero and the removed mass is recorded.
pub fn diffraction_measure<T: Real>(
    c: &PosDefSequence<T>,
    grid: usize,
    kernel_order: usize,
    atom_threshold: T,
    background_correction: bool,
) -> Result<TorusMeasure<T>> {
    precondition(kernel_order <= c.max_lag(), format!("kernel order {kernel_order} exceeds max lag {}", c.max_lag()))?;
    precondition(atom_threshold > T::zero(), "atom threshold must be positive")?;
    let c0 = c.c0();
    let mut atoms = atom_scan(c, atom_threshold, grid);
    if background_correction {
        atoms = correct_background(atoms, c0, c.max_lag());
    }
    let detected = atoms.iter().fold(T::zero(), |a, x| a + x.mass);
    if detected > c0 + c0.mag() * T::exact_tol() {
        return Err(Error::OverDetection { detected: detected.to_f64_lossy(), total: c0.to_f64_lossy() });
    }
    let mut lags: Vec<Complex<T>> = c
        .nonnegative()
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let nn = T::from_usize_lossy(n);
            atoms.iter().fold(*v, |acc, a| acc - turn(nn * a.frequency) * a.mass)
        })
        .collect();
    // exact cancellation may leave c_0 a rounding error below zero
    lags[0].re = lags[0].re.max(T::zero());
    let residual = PosDefSequence::from_nonnegative(&lags)?;
    let mut density = bochner_density(&residual, grid, kernel_order)?;
    let mut clipped = Vec::new();
    for d in density.iter_mut() {
        if *d < T::zero() {
            clipped.push(-*d);
            *d = T::zero();
        }
    }
    let clipped_mass = crate::reduce::pairwise_sum(&clipped) / T::from_usize_lossy(grid);
    Ok(TorusMeasure { atoms, density, kernel_order, total_mass: c0, max_lag: c.max_lag(), clipped_mass })
}

/// [`diffraction_measure`] with parameters resolved from a config and the
/// threshold taken relative to `c_0`.
pub fn measure_with<T: Real>(c: &PosDefSequence<T>, params: &DiffractionParams) -> Result<TorusMeasure<T>> {
    let (l, grid) = params.resolve(c.max_lag());
    let tau = T::c(params.atom_threshold) * c.c0().max(T::min_positive_value());
    diffraction_measure(c, grid, l, tau, params.background_correction)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureDistance<T> {
    pub coeff_sup_distance: T,
    pub cdf_distance: T,
}

/// Sup distance of Fourier coefficients over `|n| ≤ K` and sup distance of
/// grid CDFs.
pub fn compare_measures<T: Real>(a: &TorusMeasure<T>, b: &TorusMeasure<T>, lag_horizon: usize) -> Result<MeasureDistance<T>> {
    if a.grid() != b.grid() {
        return Err(Error::Incompatible(format!("grid sizes {} and {} differ", a.grid(), b.grid())));
    }
    let k = lag_horizon as i64;
    let coeff = (-k..=k).fold(T::zero(), |m, n| m.max((a.fourier_coefficient(n) - b.fourier_coefficient(n)).norm()));
    let cdf = a.cdf().iter().zip(b.cdf()).fold(T::zero(), |m, (x, y)| m.max((*x - y).mag()));
    Ok(MeasureDistance { coeff_sup_distance: coeff, cdf_distance: cdf })
}

/// Coarse shape of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralType {
    PurePoint,
    Mixed,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary<T> {
    pub pp_energy: T,
    pub atomic_mass: T,
    pub continuous_mass: T,
    pub kind: SpectralType,
}

impl<T: Real> SpectralSummary<T> {
    /// Pure point when atoms carry all but `τ·c_0`, continuous when they
    /// carry at most `τ·c_0`.
    pub fn of(c: &PosDefSequence<T>, m: &TorusMeasure<T>, tau: T) -> Self {
        let c0 = c.c0();
        let atomic = m.atomic_mass();
        let kind = if atomic >= (T::one() - tau) * c0 {
            SpectralType::PurePoint
        } else if atomic <= tau * c0 {
            SpectralType::Continuous
        } else {
            SpectralType::Mixed
        };
        SpectralSummary { pp_energy: wiener_pp_energy(c), atomic_mass: atomic, continuous_mass: m.continuous_mass(), kind }
    }
}

/// Both sides of the spectral/diffraction correspondence for one
/// observable.
#[derive(Debug, Clone)]
pub struct SpectrumReport<T: Real> {
    pub system: String,
    pub observable: String,
    pub orbit_start: String,
    /// Diffraction side: one orbit.
    pub orbit: PosDefSequence<T>,
    /// Spectral side: Monte Carlo over the invariant measure.
    pub mc: PosDefSequence<T>,
    pub diffraction: TorusMeasure<T>,
    pub spectral: TorusMeasure<T>,
    pub distance: MeasureDistance<T>,
    /// `sup_{|n|≤K} |c_n^{mc} − c_n^{orbit}|`.
    pub coefficient_distance: T,
    pub summary: SpectralSummary<T>,
    pub mc_summary: SpectralSummary<T>,
}

/// `sup_{|n|≤K} |a_n − b_n|` over the common lag range.
pub fn coefficient_distance<T: Real>(a: &PosDefSequence<T>, b: &PosDefSequence<T>) -> T {
    let k = a.max_lag().min(b.max_lag()) as i64;
    (-k..=k).fold(T::zero(), |m, n| m.max((a.at(n) - b.at(n)).norm()))
}

/// Runs the orbit and Monte Carlo estimators, turns both windows into
/// measures and compares them.
pub fn spectrum_report<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
    diffraction: &DiffractionParams,
) -> Result<SpectrumReport<T>> {
    params.validate()?;
    f.check(spec)?;
    let x = orbit_start(spec, params)?;
    let orbit = orbit_autocorrelation(spec, f, &x, params)?;
    let mc = spectral_coefficients_mc(spec, f, params)?;
    let dm = measure_with(&orbit, diffraction)?;
    let sm = measure_with(&mc, diffraction)?;
    let distance = compare_measures(&dm, &sm, params.max_lag)?;
    let tau = T::c(diffraction.atom_threshold);
    Ok(SpectrumReport {
        system: spec.name(),
        observable: f.label().to_string(),
        orbit_start: x.describe(),
        coefficient_distance: coefficient_distance(&orbit, &mc),
        summary: SpectralSummary::of(&orbit, &dm, tau),
        mc_summary: SpectralSummary::of(&mc, &sm, tau),
        orbit,
        mc,
        diffraction: dm,
        spectral: sm,
        distance,
    })
}

/// Coefficients of the measure minus the Fejér-weighted remainder; a
/// diagnostic for the round trip `c ↦ μ ↦ μ̂`.
pub fn round_trip_error<T: Real>(c: &PosDefSequence<T>, m: &TorusMeasure<T>, horizon: usize) -> T {
    let k = horizon.min(c.max_lag()) as i64;
    (-k..=k).fold(T::zero(), |acc, n| {
        let nn = T::from_i64_lossy(n);
        let atoms = m.atoms.iter().fold(Complex::new(T::zero(), T::zero()), |s, a| s + turn(nn * a.frequency) * a.mass);
        let w = crate::algebra::fejer_weight::<T>(n, m.kernel_order);
        let expect = atoms + (c.at(n) - atoms) * w;
        acc.max((m.fourier_coefficient(n) - expect).norm())
    })
}
