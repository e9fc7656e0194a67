//! Bounded continuous observables `f ∈ C(X)`.

use num_complex::Complex;

use super::{State, SystemSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind<T: Real> {
    Constant(Complex<T>),
    /// `f(x) = w[x_0]`; on cyclic systems `x_0` is the state itself.
    LetterWeights(Vec<Complex<T>>),
    /// Indicator of the cylinder `{x : x_{offset..offset+|word|} = word}`.
    Cylinder { word: Vec<u8>, offset: i64 },
    /// Torus character `ξ ↦ e^{2πikξ}` on a rotation.
    Character(i64),
}

/// A bounded observable, optionally centered by subtracting its mean under
/// the invariant measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Real> {
    kind: ObservableKind<T>,
    mean_shift: Complex<T>,
    sup_bound: T,
    label: String,
}

fn zero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> Observable<T> {
    pub fn constant(value: Complex<T>) -> Self {
        Observable { kind: ObservableKind::Constant(value), mean_shift: zero(), sup_bound: value.norm(), label: "constant".into() }
    }

    pub fn one() -> Self {
        let mut o = Self::constant(Complex::new(T::one(), T::zero()));
        o.label = "one".into();
        o
    }

    pub fn letter_weights(weights: Vec<Complex<T>>) -> Self {
        let sup_bound = weights.iter().fold(T::zero(), |a, w| a.max(w.norm()));
        Observable { kind: ObservableKind::LetterWeights(weights), mean_shift: zero(), sup_bound, label: "weights".into() }
    }

    /// `+1` on the first letter, `−1` on the second.
    pub fn sign() -> Self {
        let mut o = Self::letter_weights(vec![Complex::new(T::one(), T::zero()), Complex::new(-T::one(), T::zero())]);
        o.label = "sign".into();
        o
    }

    pub fn indicator(letter: u8) -> Self {
        let mut w = vec![zero(); letter as usize + 1];
        w[letter as usize] = Complex::new(T::one(), T::zero());
        let mut o = Self::letter_weights(w);
        o.label = format!("indicator:{letter}");
        o
    }

    pub fn cylinder(word: Vec<u8>, offset: i64) -> Self {
        Observable { kind: ObservableKind::Cylinder { word, offset }, mean_shift: zero(), sup_bound: T::one(), label: "cylinder".into() }
    }

    /// `ξ ↦ e^{2πikξ}`.
    pub fn character(k: i64) -> Self {
        Observable { kind: ObservableKind::Character(k), mean_shift: zero(), sup_bound: T::one(), label: format!("character:{k}") }
    }

    /// The continuous eigenfunction `ξ ↦ e^{−2πiξ}` of a rotation by `α`,
    /// with `Uf = e^{2πiα}f`; its spectral measure is the unit atom at `α`.
    pub fn rotation_eigenfunction() -> Self {
        let mut o = Self::character(-1);
        o.label = "character".into();
        o
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &ObservableKind<T> {
        &self.kind
    }

    pub fn sup_bound(&self) -> T {
        self.sup_bound
    }

    pub fn mean_shift(&self) -> Complex<T> {
        self.mean_shift
    }

    /// Checks the observable is defined on `spec`.
    pub fn check(&self, spec: &SystemSpec) -> Result<()> {
        match (&self.kind, spec) {
            (ObservableKind::Constant(_), _) => Ok(()),
            (ObservableKind::Character(_), SystemSpec::IrrationalRotation(_)) => Ok(()),
            (ObservableKind::Character(_), _) => {
                Err(Error::InvalidObservable("characters are only defined on rotations".into()))
            }
            (_, SystemSpec::IrrationalRotation(_)) => {
                Err(Error::InvalidObservable(format!("'{}' is not defined on a rotation", self.label)))
            }
            (ObservableKind::LetterWeights(w), _) => {
                let n = spec.alphabet_size().unwrap_or(0);
                if w.len() > n || w.is_empty() {
                    Err(Error::InvalidObservable(format!("{} letter weights for an alphabet of {n}", w.len())))
                } else {
                    Ok(())
                }
            }
            (ObservableKind::Cylinder { word, .. }, _) => {
                let n = spec.alphabet_size().unwrap_or(0);
                if word.is_empty() || word.iter().any(|&l| l as usize >= n) {
                    Err(Error::InvalidObservable("cylinder word uses letters outside the alphabet".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Mean of the uncentered observable under the invariant measure.
    ///
    /// Exact except for cylinders longer than one letter on subshifts, where
    /// the word frequency is counted on a prefix of length 2²⁰.
    pub fn invariant_mean(&self, spec: &SystemSpec) -> Result<Complex<T>> {
        self.check(spec)?;
        let cf = |x: f64| Complex::new(T::c(x), T::zero());
        Ok(match &self.kind {
            ObservableKind::Constant(v) => *v,
            ObservableKind::Character(0) => Complex::new(T::one(), T::zero()),
            ObservableKind::Character(_) => zero(),
            ObservableKind::LetterWeights(w) => {
                let freq = spec.letter_frequencies().unwrap_or_default();
                w.iter().zip(&freq).fold(zero(), |a, (wi, p)| a + *wi * T::c(*p))
            }
            ObservableKind::Cylinder { word, .. } => match spec {
                SystemSpec::FiniteCyclic(c) => {
                    // the word reads x, α_{−1}x, … so it pins down x
                    let n = c.size();
                    let hits: f64 = (0..n)
                        .filter(|&x| word.iter().enumerate().all(|(j, &l)| c.shift(x, j as i64) == l as usize))
                        .map(|x| c.weights()[x])
                        .sum();
                    cf(hits)
                }
                SystemSpec::BernoulliShift(b) => {
                    cf(word.iter().map(|&l| b.probabilities()[l as usize]).product())
                }
                _ if word.len() == 1 => cf(spec.letter_frequencies().unwrap_or_default()[word[0] as usize]),
                SystemSpec::SubstitutionSubshift(s) => {
                    let n = 1 << 20;
                    let u = s.fixed_point(n + word.len());
                    let hits = u.windows(word.len()).take(n).filter(|w| *w == word.as_slice()).count();
                    cf(hits as f64 / n as f64)
                }
                SystemSpec::ExplicitSequence(e) => {
                    let n = (e.frequencies().len().max(1) as u64).max(1 << 16) as i64;
                    let hits = (0..n)
                        .filter(|&j| word.iter().enumerate().all(|(i, &l)| e.letter(j + i as i64) == l))
                        .count();
                    cf(hits as f64 / n as f64)
                }
                SystemSpec::IrrationalRotation(_) => unreachable!("rejected by check"),
            },
        })
    }

    /// `f − ∫f dm`.
    pub fn centered(&self, spec: &SystemSpec) -> Result<Self> {
        let mean = self.invariant_mean(spec)?;
        let mut out = self.clone();
        out.mean_shift = mean;
        out.sup_bound = self.raw_sup(spec) + mean.norm();
        out.label = format!("centered-{}", self.label);
        Ok(out)
    }

    fn raw_sup(&self, _spec: &SystemSpec) -> T {
        match &self.kind {
            ObservableKind::Constant(v) => v.norm(),
            ObservableKind::LetterWeights(w) => w.iter().fold(T::zero(), |a, x| a.max(x.norm())),
            ObservableKind::Cylinder { .. } | ObservableKind::Character(_) => T::one(),
        }
    }

    /// `f(x)`, evaluated directly on the state.
    pub fn eval(&self, spec: &SystemSpec, x: &State) -> Result<Complex<T>> {
        self.check(spec)?;
        let v = match (&self.kind, x) {
            (ObservableKind::Constant(v), _) => *v,
            (ObservableKind::Character(k), State::Rotation(xi)) => {
                crate::scalar::turn(T::c(((*k as f64) * xi).rem_euclid(1.0)))
            }
            (ObservableKind::LetterWeights(w), _) => {
                let l = spec.letters(x, 0, 1)?[0] as usize;
                w.get(l).copied().unwrap_or_else(zero)
            }
            (ObservableKind::Cylinder { word, offset }, _) => {
                let letters = spec.letters(x, *offset, word.len())?;
                if letters == *word {
                    Complex::new(T::one(), T::zero())
                } else {
                    zero()
                }
            }
            (ObservableKind::Character(_), _) => unreachable!("rejected by check"),
        };
        Ok(v - self.mean_shift)
    }

    /// `f(α_{−n}x)` for `n ∈ start..start+len`.
    pub fn evaluate_orbit(&self, spec: &SystemSpec, x: &State, start: i64, len: usize) -> Result<Vec<Complex<T>>> {
        self.check(spec)?;
        let shift = self.mean_shift;
        let out = match &self.kind {
            ObservableKind::Constant(v) => vec![*v - shift; len],
            ObservableKind::Character(k) => {
                let (SystemSpec::IrrationalRotation(r), State::Rotation(xi)) = (spec, x) else {
                    return Err(Error::InvalidObservable("character needs a rotation state".into()));
                };
                (0..len as i64)
                    .map(|j| {
                        let phase = (*k as f64) * r.shift(*xi, start + j);
                        crate::scalar::turn(T::c(phase.rem_euclid(1.0))) - shift
                    })
                    .collect()
            }
            ObservableKind::LetterWeights(w) => spec
                .letters(x, start, len)?
                .into_iter()
                .map(|l| w.get(l as usize).copied().unwrap_or_else(zero) - shift)
                .collect(),
            ObservableKind::Cylinder { word, offset } => {
                let letters = spec.letters(x, start + offset, len + word.len() - 1)?;
                let one = Complex::new(T::one(), T::zero());
                letters
                    .windows(word.len())
                    .map(|w| if w == word.as_slice() { one - shift } else { zero::<T>() - shift })
                    .collect()
            }
        };
        Ok(out)
    }
}
