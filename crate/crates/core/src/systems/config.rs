//! JSON configuration of systems and the catalogue of built-in names.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Bernoulli, ExplicitSequence, FiniteCyclic, Observable, Rotation, Substitution, SystemSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaConfig {
    Named(String),
    Value(f64),
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig::Named("golden".into())
    }
}

/// `{"kind": "...", ...}` description of a system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemConfig {
    Cyclic {
        size: usize,
        #[serde(default = "one")]
        step: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Rotation {
        #[serde(default)]
        alpha: AlphaConfig,
    },
    Bernoulli {
        #[serde(default = "sign_alphabet")]
        alphabet: Vec<String>,
        #[serde(default = "fair")]
        probabilities: Vec<f64>,
    },
    /// Either a built-in `name` or explicit `rules` (letter → image); rule
    /// letters form the alphabet in sorted order.
    Substitution {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rules: Option<BTreeMap<char, String>>,
    },
    /// The periodic sequence `… w w w …`; letters are the distinct chars of
    /// `word` in sorted order.
    Explicit { word: String },
}

fn one() -> usize {
    1
}

fn sign_alphabet() -> Vec<String> {
    vec!["+1".into(), "-1".into()]
}

fn fair() -> Vec<f64> {
    vec![0.5, 0.5]
}

/// Names accepted by `--system`.
pub fn builtin_names() -> &'static [&'static str] {
    &["fibonacci", "thue-morse", "period-doubling", "rotation", "bernoulli", "cyclic"]
}

impl SystemConfig {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(match name {
            "fibonacci" | "thue-morse" | "period-doubling" => {
                SystemConfig::Substitution { name: Some(name.into()), rules: None }
            }
            "rotation" => SystemConfig::Rotation { alpha: AlphaConfig::default() },
            "bernoulli" => SystemConfig::Bernoulli { alphabet: sign_alphabet(), probabilities: fair() },
            "cyclic" => SystemConfig::Cyclic { size: 12, step: 1, weights: None },
            other => {
                return Err(Error::Parse(format!(
                    "unknown system '{other}'; expected one of {}",
                    builtin_names().join(", ")
                )))
            }
        })
    }

    pub fn build(&self) -> Result<SystemSpec> {
        Ok(match self {
            SystemConfig::Cyclic { size, step, weights } => {
                SystemSpec::FiniteCyclic(FiniteCyclic::new(*size, *step, weights.clone())?)
            }
            SystemConfig::Rotation { alpha } => SystemSpec::IrrationalRotation(match alpha {
                AlphaConfig::Named(n) if n == "golden" => Rotation::golden_mean(),
                AlphaConfig::Named(n) => return Err(Error::Parse(format!("unknown rotation constant '{n}'"))),
                AlphaConfig::Value(a) => Rotation::new(*a)?,
            }),
            SystemConfig::Bernoulli { alphabet, probabilities } => {
                SystemSpec::BernoulliShift(Bernoulli::new(alphabet.clone(), probabilities.clone())?)
            }
            SystemConfig::Substitution { name, rules } => SystemSpec::SubstitutionSubshift(match (name, rules) {
                (_, Some(rules)) => {
                    let pairs: Vec<(char, &str)> = rules.iter().map(|(k, v)| (*k, v.as_str())).collect();
                    Substitution::new(name.as_deref().unwrap_or("custom"), &pairs)?
                }
                (Some(n), None) => match n.as_str() {
                    "fibonacci" => Substitution::fibonacci(),
                    "thue-morse" => Substitution::thue_morse(),
                    "period-doubling" => Substitution::period_doubling(),
                    other => return Err(Error::Parse(format!("unknown substitution '{other}'"))),
                },
                (None, None) => return Err(Error::Parse("substitution needs a name or rules".into())),
            }),
            SystemConfig::Explicit { word } => {
                let mut letters: Vec<char> = word.chars().collect();
                letters.sort_unstable();
                letters.dedup();
                let idx: Vec<u8> = word.chars().map(|c| letters.binary_search(&c).expect("present") as u8).collect();
                let seq = ExplicitSequence::periodic("explicit", idx)?
                    .with_letter_names(letters.iter().map(|c| c.to_string()).collect());
                SystemSpec::ExplicitSequence(seq)
            }
        })
    }

    /// Parameter schema, for the catalogue listing.
    pub fn schema(&self) -> serde_json::Value {
        match self {
            SystemConfig::Cyclic { .. } => serde_json::json!({
                "kind": "cyclic", "size": "integer ≥ 1", "step": "integer (default 1)",
                "weights": "optional probability vector, invariant under the step"
            }),
            SystemConfig::Rotation { .. } => serde_json::json!({
                "kind": "rotation", "alpha": "\"golden\" or a number in (0,1), irrational"
            }),
            SystemConfig::Bernoulli { .. } => serde_json::json!({
                "kind": "bernoulli", "alphabet": "list of symbol names (default [\"+1\",\"-1\"])",
                "probabilities": "probability vector (default [0.5,0.5])"
            }),
            SystemConfig::Substitution { .. } => serde_json::json!({
                "kind": "substitution", "name": "fibonacci | thue-morse | period-doubling",
                "rules": "optional map letter → image word (primitive, with a seed letter)"
            }),
            SystemConfig::Explicit { .. } => serde_json::json!({
                "kind": "explicit", "word": "period word of a periodic sequence"
            }),
        }
    }
}

/// Observable names understood by [`ObservableName::resolve`].
pub fn observable_names() -> &'static [&'static str] {
    &[
        "one",
        "character",
        "character:<k>",
        "sign",
        "origin",
        "indicator:<letter>",
        "cylinder:<word>[@<offset>]",
        "weights:<w0>,<w1>,...",
        "centered-<name>",
    ]
}

/// A textual observable description, resolved against a system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservableName(pub String);

impl ObservableName {
    pub fn resolve<T: Real>(&self, spec: &SystemSpec) -> Result<Observable<T>> {
        let name = self.0.trim();
        if let Some(inner) = name.strip_prefix("centered-") {
            let base = ObservableName(inner.into()).resolve::<T>(spec)?;
            return Ok(base.centered(spec)?.with_label(name));
        }
        let letter = |s: &str| {
            spec.letter_index(s)
                .ok_or_else(|| Error::InvalidObservable(format!("unknown letter '{s}' for {}", spec.name())))
        };
        let obs = match name.split_once(':') {
            None => match name {
                "one" => Observable::one(),
                "character" => Observable::rotation_eigenfunction(),
                "sign" | "origin" | "letter" => Observable::sign().with_label(name),
                _ => return Err(Error::InvalidObservable(format!("unknown observable '{name}'"))),
            },
            Some(("character", k)) => Observable::character(
                k.parse().map_err(|_| Error::InvalidObservable(format!("bad character index '{k}'")))?,
            ),
            Some(("indicator", l)) => Observable::indicator(letter(l)?),
            Some(("cylinder", rest)) => {
                let (word, offset) = match rest.split_once('@') {
                    Some((w, o)) => {
                        (w, o.parse().map_err(|_| Error::InvalidObservable(format!("bad offset '{o}'")))?)
                    }
                    None => (rest, 0i64),
                };
                let word = word.chars().map(|c| letter(&c.to_string())).collect::<Result<Vec<u8>>>()?;
                Observable::cylinder(word, offset)
            }
            Some(("weights", ws)) => {
                let w = ws
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map(|v| Complex::new(T::c(v), T::zero()))
                            .map_err(|_| Error::InvalidObservable(format!("bad weight '{x}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Observable::letter_weights(w)
            }
            _ => return Err(Error::InvalidObservable(format!("unknown observable '{name}'"))),
        };
        obs.check(spec)?;
        Ok(obs.with_label(name))
    }
}
