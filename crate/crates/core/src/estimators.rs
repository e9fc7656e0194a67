//! The two routes to `c_n = ⟨Uⁿf, f⟩`: Monte Carlo over the invariant
//! measure (spectral side) and self-correlation of a single orbit
//! (diffraction side). Also the exact finite-system oracle and the map
//! `𝒩^f(φ) = Σ_n φ(n) Uⁿf`.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::algebra::{PosDefSequence, TestFunction};
use crate::error::{precondition, Error, Result};
use crate::reduce::block_sum;
use crate::rng;
use crate::scalar::Real;
use crate::systems::{Observable, SampledSignal, State, SystemSpec};

/// How lags are read from an orbit window of base length `N`.
///
/// Both conventions divide by `N`. `Biased` only uses the `N` samples of
/// the window, so `c_k` has `N − k` summands and the estimate is exactly
/// positive definite. `LagExtended` reads `N + K` samples and gives every
/// lag the full `N` summands, which removes the `1 − k/N` taper and makes
/// the estimate exact on periodic orbits whose period divides `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WindowConvention {
    #[default]
    Biased,
    LagExtended,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorParams {
    pub max_lag: usize,
    pub orbit_length: usize,
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub window: WindowConvention,
    /// Statistical tolerance for sampled comparisons.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_mc() -> usize {
    100_000
}

fn default_tol() -> f64 {
    5e-2
}

impl EstimatorParams {
    pub fn new(max_lag: usize, orbit_length: usize, mc_samples: usize, seed: u64) -> Self {
        EstimatorParams {
            max_lag,
            orbit_length,
            mc_samples,
            seed,
            window: WindowConvention::default(),
            tolerance: default_tol(),
        }
    }

    pub fn with_window(mut self, window: WindowConvention) -> Self {
        self.window = window;
        self
    }

    /// `K ≤ N/10` and `M ≥ 100`.
    pub fn validate(&self) -> Result<()> {
        precondition(
            self.max_lag * 10 <= self.orbit_length,
            format!("max lag K = {} exceeds N/10 for orbit length N = {}", self.max_lag, self.orbit_length),
        )?;
        precondition(self.mc_samples >= 100, format!("mc samples M = {} below 100", self.mc_samples))
    }
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `r[k] = Σ_{n<N} full[n+k] conj(base[n])` for `k = 0..=K` by FFT, with
/// `base` the first `N` samples and `full` zero beyond its length.
fn fft_correlation<T: Real>(full: &[Complex<T>], base_len: usize, max_lag: usize) -> Vec<Complex<T>> {
    let size = (base_len + max_lag).max(full.len()).max(1).next_power_of_two();
    let mut s = vec![czero::<T>(); size];
    s[..full.len()].copy_from_slice(full);
    let mut b = vec![czero::<T>(); size];
    b[..base_len].copy_from_slice(&full[..base_len]);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    fwd.process(&mut s);
    fwd.process(&mut b);
    for (x, y) in s.iter_mut().zip(&b) {
        *x = *x * y.conj();
    }
    planner.plan_fft_inverse(size).process(&mut s);
    let scale = T::one() / T::from_usize_lossy(size);
    s.truncate(max_lag + 1);
    s.into_iter().map(|z| z * scale).collect()
}

/// Biased window self-correlation
/// `c_k = (1/N) Σ_{n=0}^{N−1−k} s[n+k]·conj(s[n])`, Hermitian-extended.
///
/// Computed by FFT of the zero-padded window in `O(N log N)`. The result is
/// `|ŝ|²/N` in disguise and therefore exactly positive definite.
pub fn empirical_autocorrelation<T: Real>(signal: &SampledSignal<T>, max_lag: usize) -> Result<PosDefSequence<T>> {
    let n = signal.len();
    precondition(n >= 1, "empty signal")?;
    precondition(max_lag * 10 <= n, format!("max lag {max_lag} exceeds N/10 for N = {n}"))?;
    let r = fft_correlation(&signal.values, n, max_lag);
    let inv = T::one() / T::from_usize_lossy(n);
    PosDefSequence::from_nonnegative(&r.into_iter().map(|z| z * inv).collect::<Vec<_>>())
}

/// Lag-extended self-correlation `c_k = (1/N) Σ_{n<N} s[n+k]·conj(s[n])`
/// over a signal of length at least `N + K`.
pub fn lag_extended_autocorrelation<T: Real>(
    values: &[Complex<T>],
    base_len: usize,
    max_lag: usize,
) -> Result<PosDefSequence<T>> {
    precondition(base_len >= 1, "empty base window")?;
    precondition(
        values.len() >= base_len + max_lag,
        format!("need {} samples, have {}", base_len + max_lag, values.len()),
    )?;
    let r = fft_correlation(&values[..base_len + max_lag], base_len, max_lag);
    let inv = T::one() / T::from_usize_lossy(base_len);
    PosDefSequence::from_nonnegative(&r.into_iter().map(|z| z * inv).collect::<Vec<_>>())
}

/// Diffraction-side coefficients of the orbit through `x`.
pub fn orbit_autocorrelation<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    x: &State,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    params.validate()?;
    let (n, k) = (params.orbit_length, params.max_lag);
    match params.window {
        WindowConvention::Biased => empirical_autocorrelation(&spec.orbit_samples(f, x, n)?, k),
        WindowConvention::LagExtended => lag_extended_autocorrelation(&spec.orbit(f, x, 0, n + k)?, n, k),
    }
}

/// Orbit starting point drawn for the diffraction side of a run.
pub fn orbit_start(spec: &SystemSpec, params: &EstimatorParams) -> Result<State> {
    spec.sample_invariant(rng::derive_seed(params.seed, "orbit-start", 0), params.orbit_length + params.max_lag)
}

/// Samples a generic point and returns its orbit autocorrelation.
pub fn orbit_coefficients<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    let x = orbit_start(spec, params)?;
    orbit_autocorrelation(spec, f, &x, params)
}

/// Monte Carlo of `c_n = ∫ g(α_{−n}x) conj(g(x)) dm(x)` for `|n| ≤ K`,
/// where `eval(x, start, len)` returns `g(α_{−j}x)` for
/// `j ∈ start..start+len`. Lags `±n` are estimated separately and then
/// averaged as `(c_n + conj(c_{−n}))/2`.
fn mc_coefficients<T, F>(spec: &SystemSpec, params: &EstimatorParams, horizon: usize, eval: F) -> Result<PosDefSequence<T>>
where
    T: Real,
    F: Fn(&State, i64, usize) -> Result<Vec<Complex<T>>> + Sync,
{
    precondition(params.mc_samples >= 100, "mc samples M must be at least 100")?;
    let k = params.max_lag;
    let width = 2 * k + 1;
    let m = params.mc_samples;
    let failure = std::sync::Mutex::new(None::<Error>);
    let sums = block_sum::<T, _>(m, 2 * width, |range, acc| {
        for i in range {
            let seed = rng::derive_seed(params.seed, "mc", i as u64);
            let vals = spec
                .sample_invariant(seed, horizon)
                .and_then(|x| eval(&x, -(k as i64), width));
            let vals = match vals {
                Ok(v) => v,
                Err(e) => {
                    failure.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
                    return;
                }
            };
            let base = vals[k].conj();
            for (j, v) in vals.iter().enumerate() {
                let z = *v * base;
                acc[j] = acc[j] + z;
                acc[width + j].re = acc[width + j].re + z.norm_sqr();
            }
        }
    });
    if let Some(e) = failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
        return Err(e);
    }
    let mm = T::from_usize_lossy(m);
    let means: Vec<Complex<T>> = sums[..width].iter().map(|z| *z / mm).collect();
    let half = T::c(0.5);
    let lags: Vec<Complex<T>> = (0..=k).map(|n| (means[k + n] + means[k - n].conj()) * half).collect();
    let stderr: Vec<T> = (0..=k)
        .map(|n| {
            let var = |j: usize| (sums[width + j].re / mm - means[j].norm_sqr()).max(T::zero());
            // the symmetrized lag averages two correlated estimates; report the larger error
            let v = var(k + n).max(var(k - n));
            (v / mm).sqrt()
        })
        .collect();
    Ok(PosDefSequence::from_nonnegative(&lags)?.with_stderr(stderr))
}

/// Spectral-side Monte Carlo estimate of `c_n = ⟨Uⁿf, f⟩` with per-lag
/// standard errors.
pub fn spectral_coefficients_mc<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    f.check(spec)?;
    let k = params.max_lag;
    mc_coefficients(spec, params, 2 * k + 1, |x, start, len| spec.orbit(f, x, start, len))
}

/// Spectral-side Monte Carlo coefficients of `g = 𝒩^f(φ)`.
pub fn nmap_coefficients_mc<T: Real>(
    phi: &TestFunction<T>,
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    f.check(spec)?;
    let horizon = 2 * params.max_lag + 2 * phi.radius() as usize + 1;
    mc_coefficients(spec, params, horizon, |x, start, len| nmap_orbit(phi, f, spec, x, start, len))
}

/// `𝒩^f(φ)(α_{−j}x) = Σ_n φ(n) f(α_{−j−n}x)` for `j ∈ start..start+len`.
pub fn nmap_orbit<T: Real>(
    phi: &TestFunction<T>,
    f: &Observable<T>,
    spec: &SystemSpec,
    x: &State,
    start: i64,
    len: usize,
) -> Result<Vec<Complex<T>>> {
    let Some((lo, hi)) = phi.support() else {
        return Ok(vec![czero(); len]);
    };
    let span = (hi - lo) as usize;
    let orbit = spec.orbit(f, x, start + lo, len + span)?;
    Ok((0..len)
        .map(|j| phi.iter().fold(czero(), |acc, (n, v)| acc + v * orbit[j + (n - lo) as usize]))
        .collect())
}

/// `𝒩^f(φ)(x) = Σ_n φ(n) f(α_{−n}x)`.
pub fn nmap_apply<T: Real>(phi: &TestFunction<T>, f: &Observable<T>, spec: &SystemSpec, x: &State) -> Result<Complex<T>> {
    Ok(nmap_orbit(phi, f, spec, x, 0, 1)?[0])
}

fn finite_states(spec: &SystemSpec) -> Result<(Vec<State>, Vec<f64>)> {
    match spec {
        SystemSpec::FiniteCyclic(c) => Ok(((0..c.size()).map(State::Cyclic).collect(), c.weights().to_vec())),
        _ => Err(Error::InvalidSystem(format!("{} is not a finite cyclic system", spec.name()))),
    }
}

/// `∫ g h̄ dm` by enumeration of a finite cyclic system.
pub fn exact_inner_product<T: Real>(
    spec: &SystemSpec,
    g: impl Fn(&State) -> Result<Complex<T>>,
    h: impl Fn(&State) -> Result<Complex<T>>,
) -> Result<Complex<T>> {
    let (states, weights) = finite_states(spec)?;
    let mut acc = czero();
    for (x, w) in states.iter().zip(weights) {
        acc = acc + g(x)? * h(x)?.conj() * T::c(w);
    }
    Ok(acc)
}

/// `c_n = Σ_x m(x) f(α_{−n}x) conj(f(x))` for `|n| ≤ K`, exactly.
pub fn exact_coefficients_finite<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    max_lag: usize,
) -> Result<PosDefSequence<T>> {
    let (states, weights) = finite_states(spec)?;
    let k = max_lag as i64;
    let mut window = vec![czero::<T>(); 2 * max_lag + 1];
    for (x, w) in states.iter().zip(weights) {
        let orbit = spec.orbit(f, x, -k, 2 * max_lag + 1)?;
        let base = orbit[max_lag].conj() * T::c(w);
        for (slot, v) in window.iter_mut().zip(&orbit) {
            *slot = *slot + *v * base;
        }
    }
    PosDefSequence::from_window_symmetrized(&window)
}

/// `|Σ_n c(n)(φ∗ψ̃)(n) − ⟨𝒩^f(φ), 𝒩^f(ψ)⟩|`.
///
/// The inner product is exact on finite cyclic systems and a Monte Carlo
/// estimate with `params.mc_samples` points otherwise.
pub fn n3_residual<T: Real>(
    c: &PosDefSequence<T>,
    phi: &TestFunction<T>,
    psi: &TestFunction<T>,
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
) -> Result<T> {
    let lhs = c.pairing(phi, psi)?;
    let rhs = if matches!(spec, SystemSpec::FiniteCyclic(_)) {
        exact_inner_product(spec, |x| nmap_apply(phi, f, spec, x), |x| nmap_apply(psi, f, spec, x))?
    } else {
        precondition(params.mc_samples >= 100, "mc samples M must be at least 100")?;
        let horizon = (phi.radius().max(psi.radius()) as usize) + 1;
        let failure = std::sync::Mutex::new(None::<Error>);
        let sum = block_sum::<T, _>(params.mc_samples, 1, |range, acc| {
            for i in range {
                let r = spec
                    .sample_invariant(rng::derive_seed(params.seed, "n3", i as u64), horizon)
                    .and_then(|x| Ok(nmap_apply(phi, f, spec, &x)? * nmap_apply(psi, f, spec, &x)?.conj()));
                match r {
                    Ok(z) => acc[0] = acc[0] + z,
                    Err(e) => {
                        failure.lock().unwrap_or_else(|p| p.into_inner()).get_or_insert(e);
                    }
                }
            }
        });
        if let Some(e) = failure.into_inner().unwrap_or_else(|p| p.into_inner()) {
            return Err(e);
        }
        sum[0] / T::from_usize_lossy(params.mc_samples)
    };
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests;
