//! Factor maps `x ↦ Φ^f_x`, `Φ^f_x(t) = f(α_{−t}x)`, and the identities
//! relating factor-side autocorrelations to the spectral side.
//!
//! Factors are represented by their generating observable together with
//! finite window evaluations; the factor space itself is never built.

use num_complex::Complex;

use crate::algebra::{PosDefSequence, TestFunction};
use crate::error::{precondition, Result};
use crate::estimators::{
    exact_coefficients_finite, exact_inner_product, nmap_apply, nmap_coefficients_mc, orbit_autocorrelation,
    EstimatorParams, WindowConvention,
};
use crate::reduce::block_sum;
use crate::rng;
use crate::scalar::Real;
use crate::systems::{Observable, State, SystemSpec};

/// The window `t ↦ Φ^f_x(t)` for `t ∈ [−W, W]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPoint<T: Real> {
    pub half_width: usize,
    /// `window[t + W] = f(α_{−t}x)`.
    pub window: Vec<Complex<T>>,
    pub center: State,
    pub sup_bound: T,
}

impl<T: Real> FactorPoint<T> {
    /// `Φ^f_x(t)`; `None` outside the window.
    pub fn at(&self, t: i64) -> Option<Complex<T>> {
        let w = self.half_width as i64;
        (t.abs() <= w).then(|| self.window[(t + w) as usize])
    }

    /// `δ_0(Φ^f_x)`, the inverse of the correspondence `f ↦ Φ^f`.
    pub fn evaluate_at_zero(&self) -> Complex<T> {
        self.window[self.half_width]
    }

    /// Recomputes the window from the stored center state.
    pub fn regenerate(&self, spec: &SystemSpec, f: &Observable<T>) -> Result<Self> {
        factor_point(spec, f, &self.center, self.half_width)
    }
}

/// The factor image of `x`, truncated to `[−W, W]`.
pub fn factor_point<T: Real>(spec: &SystemSpec, f: &Observable<T>, x: &State, half_width: usize) -> Result<FactorPoint<T>> {
    f.check(spec)?;
    let w = half_width as i64;
    let window = spec.orbit(f, x, -w, 2 * half_width + 1)?;
    Ok(FactorPoint { half_width, window, center: x.clone(), sup_bound: f.sup_bound() })
}

/// Autocorrelation of a factor window over the base range `[−N/2, N/2)`:
/// `c_k = (1/N) Σ_t Φ(t+k)·conj(Φ(t))`, by direct summation.
///
/// With `Biased` only pairs with `t + k < N/2` contribute; with
/// `LagExtended` the window must reach `N/2 + K` and every lag has `N`
/// summands.
pub fn window_autocorrelation<T: Real>(
    point: &FactorPoint<T>,
    base_len: usize,
    max_lag: usize,
    convention: WindowConvention,
) -> Result<PosDefSequence<T>> {
    precondition(base_len >= 2 && base_len % 2 == 0, "base window length must be even and positive")?;
    let half = base_len / 2;
    let reach = match convention {
        WindowConvention::Biased => half,
        WindowConvention::LagExtended => half + max_lag,
    };
    precondition(point.half_width >= reach, format!("factor window ±{} does not reach {reach}", point.half_width))?;
    let w = point.half_width as i64;
    let lo = -(half as i64);
    let hi = half as i64; // exclusive end of the base range and, for Biased, of t + k
    let sums = block_sum::<T, _>(base_len, max_lag + 1, |range, acc| {
        for i in range {
            let t = lo + i as i64;
            let base = point.window[(t + w) as usize].conj();
            for (k, slot) in acc.iter_mut().enumerate() {
                let s = t + k as i64;
                if convention == WindowConvention::Biased && s >= hi {
                    break;
                }
                *slot = *slot + point.window[(s + w) as usize] * base;
            }
        }
    });
    let inv = T::one() / T::from_usize_lossy(base_len);
    PosDefSequence::from_nonnegative(&sums.into_iter().map(|z| z * inv).collect::<Vec<_>>())
}

/// Half-width of the factor window needed for `params`.
pub fn factor_half_width(params: &EstimatorParams) -> usize {
    params.orbit_length.div_ceil(2) + params.max_lag
}

/// Factor-side autocorrelation at a given center state.
pub fn factor_autocorrelation_at<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    x: &State,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    params.validate()?;
    precondition(params.orbit_length % 2 == 0, "factor windows need an even orbit length")?;
    let point = factor_point(spec, f, x, factor_half_width(params))?;
    window_autocorrelation(&point, params.orbit_length, params.max_lag, params.window)
}

/// Samples a center state and computes its factor-side autocorrelation.
pub fn factor_autocorrelation<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    params: &EstimatorParams,
) -> Result<PosDefSequence<T>> {
    let x = spec.sample_invariant(rng::derive_seed(params.seed, "factor-start", 0), factor_half_width(params) + 1)?;
    factor_autocorrelation_at(spec, f, &x, params)
}

/// The orbit start whose one-sided samples coincide with the factor base
/// window `[−N/2, N/2)` around `x`.
pub fn base_window_start(spec: &SystemSpec, x: &State, params: &EstimatorParams) -> Result<State> {
    spec.shift(x, -((params.orbit_length / 2) as i64))
}

/// `Σ_m c_{n+m}(φ∗φ̃)(m)` for `|n| ≤ K`, i.e. `(c ∗ (φ∗φ̃)ʳ)(n)`.
///
/// `c` must cover lags up to `K + 2·radius(φ)`.
pub fn convolved_coefficients<T: Real>(c: &PosDefSequence<T>, phi: &TestFunction<T>, max_lag: usize) -> Result<PosDefSequence<T>> {
    let corr = phi.self_correlation();
    let reach = corr.support().map_or(0, |(lo, hi)| lo.abs().max(hi)) as usize;
    precondition(
        c.max_lag() >= max_lag + reach,
        format!("coefficients cover ±{} but ±{} is needed", c.max_lag(), max_lag + reach),
    )?;
    let lags: Vec<Complex<T>> = (0..=max_lag as i64)
        .map(|n| corr.iter().fold(Complex::new(T::zero(), T::zero()), |a, (m, v)| a + c.at(n + m) * v))
        .collect();
    PosDefSequence::from_nonnegative(&lags)
}

/// `sup_{|n|≤K} |(γ ∗ (φ∗φ̃)ʳ)(n) − ⟨Uⁿg, g⟩|` for `g = 𝒩^f(φ)`.
///
/// On finite cyclic systems both sides are exact finite sums. Elsewhere `γ`
/// comes from the orbit estimator and `⟨Uⁿg, g⟩` from Monte Carlo.
pub fn tmds_factor_identity_residual<T: Real>(
    spec: &SystemSpec,
    f: &Observable<T>,
    phi: &TestFunction<T>,
    params: &EstimatorParams,
) -> Result<T> {
    f.check(spec)?;
    let k = params.max_lag;
    let reach = k + 2 * phi.radius() as usize;
    let lhs;
    let rhs;
    if matches!(spec, SystemSpec::FiniteCyclic(_)) {
        lhs = convolved_coefficients(&exact_coefficients_finite(spec, f, reach)?, phi, k)?;
        let lags = (0..=k as i64)
            .map(|n| {
                exact_inner_product(spec, |x| nmap_apply(phi, f, spec, &spec.shift(x, n)?), |x| nmap_apply(phi, f, spec, x))
            })
            .collect::<Result<Vec<_>>>()?;
        rhs = PosDefSequence::from_nonnegative(&lags)?;
    } else {
        let wide = EstimatorParams { max_lag: reach, ..params.clone() };
        let x = crate::estimators::orbit_start(spec, &wide)?;
        lhs = convolved_coefficients(&orbit_autocorrelation(spec, f, &x, &wide)?, phi, k)?;
        rhs = nmap_coefficients_mc(phi, spec, f, params)?;
    }
    Ok(crate::diffraction::coefficient_distance(&lhs, &rhs))
}

/// Checks `δ_0(Φ^f_x) = f(x)` exactly on the given states.
pub fn correspondence_holds<T: Real>(spec: &SystemSpec, f: &Observable<T>, states: &[State]) -> Result<bool> {
    for x in states {
        if factor_point(spec, f, x, 1)?.evaluate_at_zero() != f.eval(spec, x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`correspondence_holds`] on `samples` states drawn from the invariant
/// measure.
pub fn correspondence_check<T: Real>(spec: &SystemSpec, f: &Observable<T>, samples: usize, seed: u64) -> Result<bool> {
    precondition(samples >= 1, "need at least one sample")?;
    let states = (0..samples)
        .map(|i| spec.sample_invariant(rng::derive_seed(seed, "correspondence", i as u64), 2))
        .collect::<Result<Vec<_>>>()?;
    correspondence_holds(spec, f, &states)
}
