//! Mean almost periodicity of orbit samples: the mean seminorm of
//! `h − h(· + t)` over `[−N, N]`, ε-almost-period sets, their relative
//! denseness, and a discrete-spectrum classifier built on them.
//!
//! Verdicts are "consistent with" statements over finitely many sampled
//! points and finite horizons, never proofs.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};
use crate::rng;
use crate::scalar::Real;
use crate::systems::{Observable, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanApParams {
    /// Averaging half-width `N`; the window is `[−N, N]`.
    pub horizon: usize,
    /// Shifts are searched in `[−T_max, T_max]`.
    pub shift_range: usize,
    /// Strictly decreasing positive thresholds.
    pub epsilons: Vec<f64>,
    /// Per-ε gap bounds; when absent, `min(4·t_min(ε), T_max/4)` with
    /// `t_min(ε)` the smallest nonzero ε-almost period found.
    #[serde(default)]
    pub gap_bounds: Option<Vec<usize>>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl MeanApParams {
    pub fn new(horizon: usize, shift_range: usize, epsilons: Vec<f64>) -> Self {
        MeanApParams { horizon, shift_range, epsilons, gap_bounds: None, trials: 1, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        precondition(self.shift_range >= 1, "shift range must be positive")?;
        precondition(
            self.horizon >= 10 * self.shift_range,
            format!("horizon {} must be at least 10·T_max = {}", self.horizon, 10 * self.shift_range),
        )?;
        precondition(!self.epsilons.is_empty(), "at least one ε is required")?;
        precondition(self.epsilons.iter().all(|e| *e > 0.0 && e.is_finite()), "ε values must be positive")?;
        precondition(self.epsilons.windows(2).all(|w| w[0] > w[1]), "ε values must be strictly decreasing")?;
        if let Some(b) = &self.gap_bounds {
            precondition(b.len() == self.epsilons.len(), "one gap bound per ε is required")?;
        }
        precondition(self.trials >= 1, "at least one trial is required")
    }

    /// Edge margin excluded from gap measurements.
    pub fn margin(&self) -> usize {
        self.shift_range / 10
    }
}

/// `(1/(2N+1−|t|)) Σ_s |h(s) − h(s+t)|` over the overlap of `[−N, N]` with
/// its translate. `h[s + N]` holds `h(s)`.
pub fn mean_seminorm_diff<T: Real>(h: &[Complex<T>], t: i64, horizon: usize) -> Result<T> {
    precondition(h.len() == 2 * horizon + 1, format!("expected {} samples, got {}", 2 * horizon + 1, h.len()))?;
    precondition(t.unsigned_abs() as usize * 10 <= horizon, format!("shift {t} exceeds N/10 for N = {horizon}"))?;
    Ok(seminorm_unchecked(h, t))
}

fn seminorm_unchecked<T: Real>(h: &[Complex<T>], t: i64) -> T {
    let a = t.unsigned_abs() as usize;
    let len = h.len() - a;
    let (x, y) = if t >= 0 { (&h[..len], &h[a..]) } else { (&h[a..], &h[..len]) };
    let diffs: Vec<T> = x.iter().zip(y).map(|(p, q)| (*p - q).norm()).collect();
    crate::reduce::pairwise_sum(&diffs) / T::from_usize_lossy(len)
}

/// Seminorms for all `t ∈ [−T_max, T_max]`, in order of `t`.
pub fn seminorm_profile<T: Real>(h: &[Complex<T>], horizon: usize, shift_range: usize) -> Result<Vec<T>> {
    precondition(h.len() == 2 * horizon + 1, format!("expected {} samples, got {}", 2 * horizon + 1, h.len()))?;
    precondition(shift_range * 10 <= horizon, format!("shift range {shift_range} exceeds N/10 for N = {horizon}"))?;
    let r = shift_range as i64;
    Ok((-r..=r).into_par_iter().map(|t| seminorm_unchecked(h, t)).collect())
}

/// Shifts with seminorm below `ε` from a profile over `[−T, T]`; `0` is
/// always included.
pub fn almost_periods_from_profile<T: Real>(profile: &[T], eps: T) -> Vec<i64> {
    let r = (profile.len() / 2) as i64;
    profile
        .iter()
        .enumerate()
        .filter(|(i, v)| **v < eps || *i as i64 == r)
        .map(|(i, _)| i as i64 - r)
        .collect()
}

/// All `t ∈ [−T_max, T_max]` with `mean_seminorm_diff(h, t) < ε`.
pub fn eps_almost_periods<T: Real>(h: &[Complex<T>], eps: T, params: &MeanApParams) -> Result<Vec<i64>> {
    let profile = seminorm_profile(h, params.horizon, params.shift_range)?;
    Ok(almost_periods_from_profile(&profile, eps))
}

/// Largest gap of the shifts inside `[−T_max + m, T_max − m]`,
/// `m = T_max/10`, counting the distance from each end of that range to the
/// nearest shift. With fewer than two shifts inside, the full range length.
pub fn relative_denseness_gap(shifts: &[i64], shift_range: usize) -> Result<usize> {
    precondition(!shifts.is_empty(), "shift list is empty")?;
    precondition(shifts.windows(2).all(|w| w[0] < w[1]), "shift list must be sorted and distinct")?;
    let m = (shift_range / 10) as i64;
    let (lo, hi) = (-(shift_range as i64) + m, shift_range as i64 - m);
    let inside: Vec<i64> = shifts.iter().copied().filter(|t| (lo..=hi).contains(t)).collect();
    if inside.len() < 2 {
        return Ok((hi - lo) as usize);
    }
    let inner = inside.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
    let edges = (inside[0] - lo).max(hi - inside[inside.len() - 1]);
    Ok(inner.max(edges) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    ConsistentWithDiscrete,
    NotMeanAp,
    /// The two horizons disagree.
    Inconclusive,
}

impl Verdict {
    fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (NotMeanAp, _) | (_, NotMeanAp) => NotMeanAp,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => ConsistentWithDiscrete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsResult {
    pub eps: f64,
    pub count: usize,
    /// Smallest nonzero almost period, if any.
    pub t_min: Option<u64>,
    pub gap_bound: usize,
    pub gap: usize,
    pub dense: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonResult {
    pub horizon: usize,
    pub verdict: Verdict,
    pub per_eps: Vec<EpsResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub start: String,
    pub verdict: Verdict,
    pub horizons: Vec<HorizonResult>,
}

/// The first (ε, gap) that failed, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub horizon: usize,
    pub eps: f64,
    pub gap: usize,
    pub gap_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableVerdict {
    pub observable: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub trials: Vec<TrialResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub system: String,
    pub params: MeanApParams,
    pub overall: Verdict,
    pub observables: Vec<ObservableVerdict>,
    pub note: String,
}

/// Almost-period analysis of one two-sided sample window.
pub fn analyze_window<T: Real>(h: &[Complex<T>], horizon: usize, params: &MeanApParams) -> Result<HorizonResult> {
    let profile = seminorm_profile(h, horizon, params.shift_range)?;
    let cap = (params.shift_range / 4).max(1);
    let mut per_eps = Vec::with_capacity(params.epsilons.len());
    for (i, &eps) in params.epsilons.iter().enumerate() {
        let shifts = almost_periods_from_profile(&profile, T::c(eps));
        let t_min = shifts.iter().filter(|t| **t != 0).map(|t| t.unsigned_abs()).min();
        let gap_bound = match &params.gap_bounds {
            Some(b) => b[i],
            None => t_min.map_or(cap, |t| (4 * t as usize).min(cap)),
        };
        let gap = relative_denseness_gap(&shifts, params.shift_range)?;
        per_eps.push(EpsResult { eps, count: shifts.len(), t_min, gap_bound, gap, dense: gap <= gap_bound });
    }
    let verdict =
        if per_eps.iter().all(|e| e.dense) { Verdict::ConsistentWithDiscrete } else { Verdict::NotMeanAp };
    Ok(HorizonResult { horizon, verdict, per_eps })
}

/// Runs the almost-period test for each observable on `params.trials`
/// sampled points at horizons `N` and `N/2`.
///
/// A trial is consistent with discrete spectrum when, at both horizons,
/// every ε yields an almost-period set with gap within its bound; a trial
/// whose horizons disagree is inconclusive. Per observable and overall, the
/// verdicts are combined by conjunction.
pub fn classify_discrete_spectrum<T: Real>(
    spec: &SystemSpec,
    observables: &[Observable<T>],
    params: &MeanApParams,
) -> Result<ClassifierReport> {
    params.validate()?;
    precondition(!observables.is_empty(), "at least one observable is required")?;
    precondition(
        params.horizon / 2 >= 10 * params.shift_range,
        "the companion horizon N/2 must also be at least 10·T_max",
    )?;
    for f in observables {
        f.check(spec)?;
    }
    let n = params.horizon;
    let mut results = Vec::with_capacity(observables.len());
    for f in observables {
        let mut trials = Vec::with_capacity(params.trials);
        for trial in 0..params.trials {
            let seed = rng::derive_seed(params.seed, &format!("classify:{}", f.label()), trial as u64);
            let x = spec.sample_invariant(seed, n + 1)?;
            let h = spec.orbit(f, &x, -(n as i64), 2 * n + 1)?;
            let half = n / 2;
            let h_half = &h[n - half..=n + half];
            let horizons = vec![analyze_window(&h, n, params)?, analyze_window(h_half, half, params)?];
            let verdict =
                if horizons[0].verdict == horizons[1].verdict { horizons[0].verdict } else { Verdict::Inconclusive };
            trials.push(TrialResult { trial, start: x.describe(), verdict, horizons });
        }
        let verdict = trials.iter().fold(Verdict::ConsistentWithDiscrete, |v, t| v.and(t.verdict));
        let witness = trials.iter().find_map(|t| {
            t.horizons.iter().find_map(|h| {
                h.per_eps.iter().find(|e| !e.dense).map(|e| Witness {
                    trial: t.trial,
                    horizon: h.horizon,
                    eps: e.eps,
                    gap: e.gap,
                    gap_bound: e.gap_bound,
                })
            })
        });
        results.push(ObservableVerdict { observable: f.label().to_string(), verdict, witness, trials });
    }
    let overall = results.iter().fold(Verdict::ConsistentWithDiscrete, |v, r| v.and(r.verdict));
    Ok(ClassifierReport {
        system: spec.name(),
        params: params.clone(),
        overall,
        observables: results,
        note: "verdicts are consistent-with statements over finitely many sampled points and finite horizons; \
               gap bounds are heuristic defaults unless configured"
            .into(),
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::systems::{Bernoulli, Rotation, Substitution};

    type C = Complex<f64>;

    fn window(spec: &SystemSpec, f: &Observable<f64>, seed: u64, n: usize) -> Vec<C> {
        let x = spec.sample_invariant(seed, n + 1).unwrap();
        spec.orbit(f, &x, -(n as i64), 2 * n + 1).unwrap()
    }

    #[test]
    fn zero_shift_and_period() {
        let h: Vec<C> = (0..2001).map(|s| C::new(((s % 7) as f64).sin(), 0.0)).collect();
        assert_eq!(mean_seminorm_diff(&h, 0, 1000).unwrap(), 0.0);
        assert_eq!(mean_seminorm_diff(&h, 7, 1000).unwrap(), 0.0);
        assert_eq!(mean_seminorm_diff(&h, -70, 1000).unwrap(), 0.0);
        assert!(mean_seminorm_diff(&h, 3, 1000).unwrap() > 0.1);
        assert!(mean_seminorm_diff(&h, 101, 1000).is_err());
        assert!(mean_seminorm_diff(&h[1..], 1, 1000).is_err());
    }

    #[test]
    fn iid_signs_differ_by_one_on_average() {
        let spec = SystemSpec::BernoulliShift(Bernoulli::fair_sign());
        let n = 50_000;
        let h = window(&spec, &Observable::sign(), 3, n);
        for t in [1, 5, -17, 1000] {
            let v = mean_seminorm_diff(&h, t, n).unwrap();
            assert!((v - 1.0).abs() <= 3.0 / (n as f64).sqrt() * 2.0, "t = {t}: {v}");
        }
        let params = MeanApParams::new(n, 1000, vec![0.5]);
        assert_eq!(eps_almost_periods(&h, 0.5, &params).unwrap(), vec![0]);
    }

    #[test]
    fn constant_has_every_shift() {
        let h = vec![C::new(1.0, 0.0); 2001];
        let params = MeanApParams::new(1000, 100, vec![0.1]);
        let s = eps_almost_periods(&h, 0.1, &params).unwrap();
        assert_eq!(s, (-100..=100).collect::<Vec<_>>());
    }

    #[test]
    fn fibonacci_numbers_are_almost_periods() {
        let spec = SystemSpec::SubstitutionSubshift(Substitution::fibonacci());
        let n = 20_000;
        let h = window(&spec, &Observable::sign(), 2, n);
        let params = MeanApParams::new(n, 1000, vec![0.5]);
        let s = eps_almost_periods(&h, 0.5, &params).unwrap();
        for fib in [5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987] {
            assert!(s.contains(&fib) && s.contains(&-fib), "{fib}");
        }
        let gap = relative_denseness_gap(&s, 1000).unwrap();
        assert!(gap <= 20, "gap {gap}");
    }

    #[test]
    fn gap_examples() {
        let all: Vec<i64> = (-100..=100).collect();
        assert_eq!(relative_denseness_gap(&all, 100).unwrap(), 1);
        assert_eq!(relative_denseness_gap(&[0], 100).unwrap(), 180);
        let fives: Vec<i64> = (-20..=20).map(|k| 5 * k).collect();
        assert_eq!(relative_denseness_gap(&fives, 100).unwrap(), 5);
        assert!(relative_denseness_gap(&[], 100).is_err());
        assert!(relative_denseness_gap(&[3, 1], 100).is_err());
    }

    #[test]
    fn params_are_validated() {
        assert!(MeanApParams::new(1000, 101, vec![0.5]).validate().is_err());
        assert!(MeanApParams::new(1000, 100, vec![0.2, 0.5]).validate().is_err());
        assert!(MeanApParams::new(1000, 100, vec![]).validate().is_err());
        assert!(MeanApParams::new(1000, 100, vec![0.5, 0.2]).validate().is_ok());
    }

    #[test]
    fn classifier_small_zoo() {
        let eps = vec![0.5, 0.2, 0.1];
        let params = MeanApParams::new(20_000, 1000, eps);
        let rot = SystemSpec::IrrationalRotation(Rotation::golden_mean());
        let r = classify_discrete_spectrum(&rot, &[Observable::<f64>::rotation_eigenfunction()], &params).unwrap();
        assert_eq!(r.overall, Verdict::ConsistentWithDiscrete, "{:#?}", r.observables[0].trials[0].horizons[0]);
        let b = SystemSpec::BernoulliShift(Bernoulli::fair_sign());
        let r = classify_discrete_spectrum(&b, &[Observable::<f64>::sign()], &params).unwrap();
        assert_eq!(r.overall, Verdict::NotMeanAp);
        assert_eq!(r.observables[0].witness.as_ref().unwrap().eps, 0.5);
    }

    fn random_periodic(p: usize, len: usize, seed: u64) -> Vec<C> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let base: Vec<C> = (0..p).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        (0..len).map(|i| base[i % p]).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn seminorm_is_nearly_symmetric(seed in 0u64..1000, p in 1usize..40, t in 0i64..=100) {
            let (n, tmax) = (1000usize, 100usize);
            let h = random_periodic(p, 2 * n + 1, seed);
            let a = mean_seminorm_diff(&h, t, n).unwrap();
            let b = mean_seminorm_diff(&h, -t, n).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 2.0 * tmax as f64 / n as f64);
        }

        #[test]
        fn almost_periods_are_monotone(seed in 0u64..1000, e1 in 0.01f64..1.0, e2 in 0.01f64..1.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h: Vec<C> = (0..2001).map(|_| C::new(if rng.random_bool(0.8) { 1.0 } else { -1.0 }, 0.0)).collect();
            let params = MeanApParams::new(1000, 100, vec![hi, lo]);
            let small = eps_almost_periods(&h, lo, &params).unwrap();
            let big = eps_almost_periods(&h, hi, &params).unwrap();
            prop_assert!(small.contains(&0));
            prop_assert!(small.iter().all(|t| big.contains(t)));
        }
    }
}
