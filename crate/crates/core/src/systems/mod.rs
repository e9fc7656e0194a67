//! Concrete ℤ-dynamical systems `(X, α, m)`: invariant-measure samplers,
//! orbit generators, and bounded observables.
//!
//! Sign convention: the orbit of a state `x` is read as `n ↦ f(α_{−n}x)`,
//! where `α_{−n}` shifts a sequence left by `n` (coordinate `j` of
//! `α_{−n}x` is coordinate `j + n` of `x`), maps a rotation state
//! `ξ ↦ ξ − nα mod 1`, and maps a cyclic state `x ↦ x − n·step mod N`.
//! The Koopman operator is `Uf = f∘α_{−1}`.

mod config;
mod observable;
mod substitution;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;

pub use config::{builtin_names, observable_names, ObservableName, SystemConfig};
pub use observable::{Observable, ObservableKind};
pub use substitution::{Substitution, TwoSidedWord};

use crate::error::{precondition, Error, Result};
use crate::rng;
use crate::scalar::Real;

/// `ℤ/Nℤ` with the translation `x ↦ x + step` and an invariant probability
/// vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCyclic {
    size: usize,
    step: usize,
    weights: Vec<f64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FiniteCyclic {
    /// Translation by one with the uniform measure.
    pub fn uniform(size: usize) -> Result<Self> {
        Self::new(size, 1, None)
    }

    /// `weights` must be constant on the cycles of `x ↦ x + step`; when
    /// `step` is a unit mod `N` there is a single cycle and only the uniform
    /// vector is invariant, so `None` or uniform weights are the only
    /// accepted inputs.
    pub fn new(size: usize, step: usize, weights: Option<Vec<f64>>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSystem("cyclic size must be positive".into()));
        }
        let step = step % size;
        let weights = weights.unwrap_or_else(|| vec![1.0 / size as f64; size]);
        if weights.len() != size {
            return Err(Error::InvalidSystem(format!("expected {size} weights, got {}", weights.len())));
        }
        check_simplex(&weights)?;
        for x in 0..size {
            if (weights[x] - weights[(x + step) % size]).abs() > 1e-12 {
                return Err(Error::InvalidSystem(format!(
                    "weights are not invariant under x ↦ x + {step} (gcd with {size} is {})",
                    gcd(step, size)
                )));
            }
        }
        Ok(FiniteCyclic { size, step, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `α_{−n}x = x − n·step mod N`.
    pub fn shift(&self, x: usize, n: i64) -> usize {
        let s = (self.step as i128 * n as i128).rem_euclid(self.size as i128) as usize;
        (x + self.size - s) % self.size
    }
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidSystem("probabilities must be nonnegative".into()));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSystem(format!("probabilities sum to {s}, not 1")));
    }
    Ok(())
}

/// Rotation `ξ ↦ ξ + α` of the circle by an irrational `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    alpha: f64,
    partial_quotients: Vec<u64>,
    warning: Option<String>,
}

impl Rotation {
    /// `α = (√5 − 1)/2`, the limit of the convergents `F_n / F_{n+1}`.
    pub fn golden_mean() -> Self {
        Self::new((5f64.sqrt() - 1.0) / 2.0).expect("golden mean is irrational")
    }

    /// Accepts `α ∈ (0, 1)`. Values whose continued fraction terminates (or
    /// has a partial quotient above 10⁶) within 12 terms are rejected as
    /// rational; a quotient above 100 records a near-rational warning, since
    /// it degrades atom separation.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidSystem(format!("rotation α = {alpha} must lie in (0, 1)")));
        }
        let mut quotients = Vec::new();
        let mut x = alpha;
        let mut warning = None;
        for _ in 0..12 {
            let inv = 1.0 / x;
            let a = inv.floor();
            let frac = inv - a;
            if a > 1e6 {
                return Err(Error::InvalidSystem(format!("rotation α = {alpha} is numerically rational")));
            }
            if a > 100.0 && warning.is_none() {
                warning = Some(format!("α = {alpha} is near-rational (partial quotient {a}); atoms may blur"));
            }
            quotients.push(a as u64);
            if frac < 1e-9 {
                return Err(Error::InvalidSystem(format!("rotation α = {alpha} is numerically rational")));
            }
            x = frac;
        }
        Ok(Rotation { alpha, partial_quotients: quotients, warning })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn partial_quotients(&self) -> &[u64] {
        &self.partial_quotients
    }

    /// Convergents `p_k / q_k` of the continued fraction.
    pub fn convergents(&self) -> Vec<(u64, u64)> {
        let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 0u64, 1u64);
        self.partial_quotients
            .iter()
            .map(|&a| {
                let (p, q) = (a * p1 + p0, a * q1 + q0);
                (p0, q0, p1, q1) = (p1, q1, p, q);
                (p, q)
            })
            .collect()
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    /// `α_{−n}ξ = ξ − nα mod 1`.
    pub fn shift(&self, xi: f64, n: i64) -> f64 {
        wrap(xi - n as f64 * self.alpha)
    }
}

fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Full shift on a finite alphabet with i.i.d. coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Bernoulli {
    alphabet: Vec<String>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Bernoulli {
    pub fn new(alphabet: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() || alphabet.len() > 256 || alphabet.len() != probabilities.len() {
            return Err(Error::InvalidSystem("alphabet and probabilities must match, 1..=256 symbols".into()));
        }
        check_simplex(&probabilities)?;
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Bernoulli { alphabet, probabilities, cumulative })
    }

    /// Fair coin on `{+1, −1}`.
    pub fn fair_sign() -> Self {
        Self::new(vec!["+1".into(), "-1".into()], vec![0.5, 0.5]).expect("valid")
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Coordinate `j` of the point keyed by `key`. Coordinates are generated
    /// on demand, so arbitrarily long orbits need no storage.
    pub fn symbol(&self, key: u64, j: i64) -> u8 {
        let u = rng::unit_f64(rng::mix64(key ^ rng::mix64(j as u64)));
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.alphabet.len() - 1) as u8
    }
}

/// A two-sided sequence given by a provider function, with an invariant
/// measure realized as a uniform offset in `[0, span)`.
#[derive(Clone)]
pub struct ExplicitSequence {
    name: String,
    alphabet_size: usize,
    provider: Arc<dyn Fn(i64) -> u8 + Send + Sync>,
    span: u64,
    frequencies: Option<Vec<f64>>,
    letter_names: Vec<String>,
}

impl fmt::Debug for ExplicitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitSequence")
            .field("name", &self.name)
            .field("alphabet_size", &self.alphabet_size)
            .field("span", &self.span)
            .finish()
    }
}

impl PartialEq for ExplicitSequence {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.alphabet_size == other.alphabet_size && self.span == other.span
    }
}

impl ExplicitSequence {
    /// `provider` must return letters below `alphabet_size`. Sampling picks
    /// the origin uniformly in `[0, span)`, which is exact for sequences with
    /// period dividing `span`.
    pub fn new(
        name: &str,
        alphabet_size: usize,
        span: u64,
        provider: impl Fn(i64) -> u8 + Send + Sync + 'static,
    ) -> Result<Self> {
        precondition(alphabet_size >= 1 && alphabet_size <= 256, "alphabet size must be in 1..=256")?;
        precondition(span >= 1, "span must be positive")?;
        Ok(ExplicitSequence {
            name: name.into(),
            alphabet_size,
            provider: Arc::new(provider),
            span,
            frequencies: None,
            letter_names: (0..alphabet_size).map(|i| i.to_string()).collect(),
        })
    }

    /// The periodic sequence `… w w w …` with `x_0 = w_0`.
    pub fn periodic(name: &str, word: Vec<u8>) -> Result<Self> {
        precondition(!word.is_empty(), "periodic word must be nonempty")?;
        let alphabet_size = *word.iter().max().expect("nonempty") as usize + 1;
        let mut freq = vec![0.0; alphabet_size];
        word.iter().for_each(|&l| freq[l as usize] += 1.0 / word.len() as f64);
        let period = word.len() as i64;
        let w = word.clone();
        let mut s = Self::new(name, alphabet_size, word.len() as u64, move |j| w[j.rem_euclid(period) as usize])?;
        s.frequencies = Some(freq);
        Ok(s)
    }

    pub fn letter(&self, j: i64) -> u8 {
        (self.provider)(j)
    }

    pub fn with_letter_names(mut self, names: Vec<String>) -> Self {
        if names.len() == self.alphabet_size {
            self.letter_names = names;
        }
        self
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Letter frequencies under the sampling measure.
    pub fn frequencies(&self) -> Vec<f64> {
        if let Some(f) = &self.frequencies {
            return f.clone();
        }
        let n = self.span.min(1 << 20) as i64;
        let mut freq = vec![0.0; self.alphabet_size];
        (0..n).for_each(|j| freq[self.letter(j) as usize] += 1.0 / n as f64);
        freq
    }
}

/// A ℤ-dynamical system together with its invariant probability measure.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    FiniteCyclic(FiniteCyclic),
    IrrationalRotation(Rotation),
    BernoulliShift(Bernoulli),
    SubstitutionSubshift(Substitution),
    ExplicitSequence(ExplicitSequence),
}

/// A point of the state space.
#[derive(Debug, Clone)]
pub enum State {
    Cyclic(usize),
    Rotation(f64),
    /// Bernoulli point: coordinate `j` is `symbol(key, origin + j)`.
    Bernoulli { key: u64, origin: i64 },
    /// Subshift point: coordinate `j` is `word.letter(origin + j)`.
    Substitution { word: Arc<TwoSidedWord>, origin: i64 },
    Explicit { origin: i64 },
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (State::Cyclic(a), State::Cyclic(b)) => a == b,
            (State::Rotation(a), State::Rotation(b)) => a.to_bits() == b.to_bits(),
            (State::Bernoulli { key: a, origin: o }, State::Bernoulli { key: b, origin: p }) => a == b && o == p,
            (State::Substitution { word: a, origin: o }, State::Substitution { word: b, origin: p }) => {
                Arc::ptr_eq(a, b) && o == p
            }
            (State::Explicit { origin: o }, State::Explicit { origin: p }) => o == p,
            _ => false,
        }
    }
}

impl State {
    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            State::Cyclic(x) => format!("cyclic:{x}"),
            State::Rotation(xi) => format!("rotation:{xi:.17}"),
            State::Bernoulli { key, origin } => format!("bernoulli:{key:016x}@{origin}"),
            State::Substitution { origin, .. } => format!("subshift@{origin}"),
            State::Explicit { origin } => format!("explicit@{origin}"),
        }
    }
}

impl SystemSpec {
    pub fn name(&self) -> String {
        match self {
            SystemSpec::FiniteCyclic(c) => format!("cyclic-{}", c.size),
            SystemSpec::IrrationalRotation(r) => format!("rotation-{}", r.alpha),
            SystemSpec::BernoulliShift(b) => format!("bernoulli-{}", b.alphabet.len()),
            SystemSpec::SubstitutionSubshift(s) => s.name().to_string(),
            SystemSpec::ExplicitSequence(e) => e.name.clone(),
        }
    }

    /// Number of letters for symbolic systems (states for cyclic ones).
    pub fn alphabet_size(&self) -> Option<usize> {
        match self {
            SystemSpec::FiniteCyclic(c) => Some(c.size),
            SystemSpec::IrrationalRotation(_) => None,
            SystemSpec::BernoulliShift(b) => Some(b.alphabet.len()),
            SystemSpec::SubstitutionSubshift(s) => Some(s.alphabet().len()),
            SystemSpec::ExplicitSequence(e) => Some(e.alphabet_size),
        }
    }

    /// Resolves a letter by display name: substitution chars, Bernoulli
    /// symbols, explicit-sequence names, or cyclic state indices.
    pub fn letter_index(&self, name: &str) -> Option<u8> {
        match self {
            SystemSpec::FiniteCyclic(c) => name.parse::<usize>().ok().filter(|&i| i < c.size.min(256)).map(|i| i as u8),
            SystemSpec::IrrationalRotation(_) => None,
            SystemSpec::BernoulliShift(b) => b.alphabet.iter().position(|a| a == name).map(|i| i as u8),
            SystemSpec::SubstitutionSubshift(s) => {
                let mut it = name.chars();
                match (it.next(), it.next()) {
                    (Some(ch), None) => s.letter_index(ch),
                    _ => None,
                }
            }
            SystemSpec::ExplicitSequence(e) => e.letter_names.iter().position(|a| a == name).map(|i| i as u8),
        }
    }

    /// Letter frequencies under the invariant measure.
    pub fn letter_frequencies(&self) -> Option<Vec<f64>> {
        match self {
            SystemSpec::FiniteCyclic(c) => Some(c.weights.clone()),
            SystemSpec::IrrationalRotation(_) => None,
            SystemSpec::BernoulliShift(b) => Some(b.probabilities.clone()),
            SystemSpec::SubstitutionSubshift(s) => Some(s.frequencies().to_vec()),
            SystemSpec::ExplicitSequence(e) => Some(e.frequencies()),
        }
    }

    /// Draws a state distributed according to the invariant measure.
    ///
    /// `horizon` is the longest orbit segment (in either direction) the
    /// caller intends to read; subshift samples are uniform positions inside
    /// a level-`k` supertile with `k = ⌈ln N / ln λ⌉ + 4`, exact up to
    /// boundary effects of relative size `N/|σ^k(a)| ≤ λ^{−4}`.
    pub fn sample_invariant(&self, seed: u64, horizon: usize) -> Result<State> {
        let mut r = rng::stream(seed, "sample-invariant", 0);
        Ok(match self {
            SystemSpec::FiniteCyclic(c) => {
                let u: f64 = r.random();
                let mut acc = 0.0;
                let mut pick = c.size - 1;
                for (i, w) in c.weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                State::Cyclic(pick)
            }
            SystemSpec::IrrationalRotation(_) => State::Rotation(r.random::<f64>()),
            SystemSpec::BernoulliShift(_) => State::Bernoulli { key: r.random(), origin: 0 },
            SystemSpec::SubstitutionSubshift(s) => {
                let k = s.level_for(horizon);
                let tile_len = supertile_len(s, k);
                let word = s.two_sided(tile_len + horizon + 1, horizon + 1)?;
                let origin = r.random_range(0..tile_len as u64) as i64;
                State::Substitution { word, origin }
            }
            SystemSpec::ExplicitSequence(e) => State::Explicit { origin: r.random_range(0..e.span) as i64 },
        })
    }

    /// `α_{−n}x`.
    pub fn shift(&self, x: &State, n: i64) -> Result<State> {
        Ok(match (self, x) {
            (SystemSpec::FiniteCyclic(c), State::Cyclic(s)) => State::Cyclic(c.shift(*s, n)),
            (SystemSpec::IrrationalRotation(r), State::Rotation(xi)) => State::Rotation(r.shift(*xi, n)),
            (SystemSpec::BernoulliShift(_), State::Bernoulli { key, origin }) => {
                State::Bernoulli { key: *key, origin: origin + n }
            }
            (SystemSpec::SubstitutionSubshift(_), State::Substitution { word, origin }) => {
                State::Substitution { word: word.clone(), origin: origin + n }
            }
            (SystemSpec::ExplicitSequence(_), State::Explicit { origin }) => State::Explicit { origin: origin + n },
            _ => return Err(state_mismatch(self, x)),
        })
    }

    /// Letters `x_j` for `j ∈ start..start+len` of a symbolic state; for a
    /// cyclic state the "letter" at `j` is the state `α_{−j}x`.
    pub fn letters(&self, x: &State, start: i64, len: usize) -> Result<Vec<u8>> {
        Ok(match (self, x) {
            (SystemSpec::FiniteCyclic(c), State::Cyclic(s)) => {
                if c.size > 256 {
                    return Err(Error::InvalidSystem("letter view needs at most 256 cyclic states".into()));
                }
                (0..len as i64).map(|j| c.shift(*s, start + j) as u8).collect()
            }
            (SystemSpec::BernoulliShift(b), State::Bernoulli { key, origin }) => {
                (0..len as i64).map(|j| b.symbol(*key, origin + start + j)).collect()
            }
            (SystemSpec::SubstitutionSubshift(_), State::Substitution { word, origin }) => {
                word.window(origin + start, len)
            }
            (SystemSpec::ExplicitSequence(e), State::Explicit { origin }) => {
                (0..len as i64).map(|j| e.letter(origin + start + j)).collect()
            }
            (SystemSpec::IrrationalRotation(_), _) => {
                return Err(Error::InvalidObservable("rotation states have no letters".into()))
            }
            _ => return Err(state_mismatch(self, x)),
        })
    }

    /// `f(α_{−n}x)` for `n ∈ start..start+len`.
    pub fn orbit<T: Real>(&self, f: &Observable<T>, x: &State, start: i64, len: usize) -> Result<Vec<Complex<T>>> {
        f.evaluate_orbit(self, x, start, len)
    }

    /// The sampled signal `values[n] = f(α_{−n}x)`, `n = 0..N`.
    pub fn orbit_samples<T: Real>(&self, f: &Observable<T>, x: &State, n: usize) -> Result<SampledSignal<T>> {
        precondition(n >= 1, "orbit length must be at least 1")?;
        Ok(SampledSignal { values: self.orbit(f, x, 0, n)?, origin: x.describe(), sup_bound: f.sup_bound() })
    }
}

fn supertile_len(s: &Substitution, k: usize) -> usize {
    let mut lens = vec![1usize; s.alphabet().len()];
    for _ in 0..k {
        lens = s.images().iter().map(|w| w.iter().map(|&l| lens[l as usize]).sum()).collect();
    }
    lens[s.seed_letter() as usize]
}

fn state_mismatch(spec: &SystemSpec, x: &State) -> Error {
    Error::InvalidSystem(format!("state {} does not belong to system {}", x.describe(), spec.name()))
}

/// A finite orbit window `n ↦ f(α_{−n}x)`, `n = 0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T: Real> {
    pub values: Vec<Complex<T>>,
    pub origin: String,
    pub sup_bound: T,
}

impl<T: Real> SampledSignal<T> {
    pub fn new(values: Vec<Complex<T>>) -> Self {
        let sup_bound = values.iter().fold(T::zero(), |a, z| a.max(z.norm()));
        SampledSignal { values, origin: "explicit".into(), sup_bound }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
