//! Primitive substitutions, their fixed points, and the two-sided words the
//! subshift samplers read from.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// A substitution on the alphabet `0..n`, with letters displayed as chars.
#[derive(Clone)]
pub struct Substitution {
    name: String,
    alphabet: Vec<char>,
    images: Vec<Vec<u8>>,
    seed: u8,
    perron: (f64, Vec<f64>),
    cache: Arc<Mutex<Option<Arc<TwoSidedWord>>>>,
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Substitution")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet)
            .field("images", &self.images)
            .finish()
    }
}

impl PartialEq for Substitution {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet && self.images == other.images
    }
}

impl Substitution {
    /// Builds from `letter → word` rules. The alphabet is the set of rule
    /// letters in the given order.
    ///
    /// Rejects rules that are not primitive, not expanding, or lack a seed
    /// letter `a` whose image starts with `a`.
    pub fn new(name: &str, rules: &[(char, &str)]) -> Result<Self> {
        if rules.is_empty() || rules.len() > 256 {
            return Err(Error::InvalidSystem("substitution needs 1..=256 letters".into()));
        }
        let alphabet: Vec<char> = rules.iter().map(|r| r.0).collect();
        let index = |ch: char| {
            alphabet
                .iter()
                .position(|&a| a == ch)
                .map(|i| i as u8)
                .ok_or_else(|| Error::InvalidSystem(format!("letter '{ch}' has no rule")))
        };
        for (i, a) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(a) {
                return Err(Error::InvalidSystem(format!("duplicate rule for '{a}'")));
            }
        }
        let images = rules
            .iter()
            .map(|(_, w)| w.chars().map(index).collect::<Result<Vec<u8>>>())
            .collect::<Result<Vec<_>>>()?;
        if images.iter().any(|w| w.is_empty()) {
            return Err(Error::InvalidSystem("images must be nonempty".into()));
        }
        if images.iter().all(|w| w.len() == 1) {
            return Err(Error::InvalidSystem("substitution is not expanding".into()));
        }
        let matrix = substitution_matrix(&images);
        if !is_primitive(&matrix) {
            return Err(Error::InvalidSystem(format!("substitution '{name}' is not primitive")));
        }
        let seed = (0..images.len())
            .find(|&a| images[a][0] as usize == a)
            .ok_or_else(|| Error::InvalidSystem(format!("substitution '{name}' has no admissible seed letter")))?
            as u8;
        let perron = perron_frobenius(&matrix);
        Ok(Substitution {
            name: name.to_string(),
            alphabet,
            images,
            seed,
            perron,
            cache: Arc::new(Mutex::new(None)),
        })
    }

    /// `a → ab, b → a`.
    pub fn fibonacci() -> Self {
        Self::new("fibonacci", &[('a', "ab"), ('b', "a")]).expect("built-in is valid")
    }

    /// `a → ab, b → ba`.
    pub fn thue_morse() -> Self {
        Self::new("thue-morse", &[('a', "ab"), ('b', "ba")]).expect("built-in is valid")
    }

    /// `a → ab, b → aa`.
    pub fn period_doubling() -> Self {
        Self::new("period-doubling", &[('a', "ab"), ('b', "aa")]).expect("built-in is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn images(&self) -> &[Vec<u8>] {
        &self.images
    }

    pub fn seed_letter(&self) -> u8 {
        self.seed
    }

    pub fn letter_index(&self, ch: char) -> Option<u8> {
        self.alphabet.iter().position(|&a| a == ch).map(|i| i as u8)
    }

    /// `M[i][j]` = number of occurrences of letter `i` in the image of `j`.
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        substitution_matrix(&self.images)
    }

    /// Perron–Frobenius eigenvalue of the substitution matrix.
    pub fn expansion(&self) -> f64 {
        self.perron.0
    }

    /// Letter frequencies: the normalized Perron eigenvector.
    pub fn frequencies(&self) -> &[f64] {
        &self.perron.1
    }

    /// Supertile level used to sample windows of length `horizon`:
    /// `⌈ln N / ln λ⌉ + 4`.
    pub fn level_for(&self, horizon: usize) -> usize {
        let n = horizon.max(2) as f64;
        (n.ln() / self.expansion().ln()).ceil() as usize + 4
    }

    /// `σ^k(letter)`.
    pub fn iterate(&self, letter: u8, k: usize) -> Vec<u8> {
        let mut w = vec![letter];
        for _ in 0..k {
            w = apply(&self.images, &w);
        }
        w
    }

    /// Prefix of length `n` of the one-sided fixed point `σ^∞(a)`.
    pub fn fixed_point(&self, n: usize) -> Vec<u8> {
        let mut w = vec![self.seed];
        while w.len() < n {
            w = apply(&self.images, &w);
        }
        w.truncate(n);
        w
    }

    pub fn render(&self, word: &[u8]) -> String {
        word.iter().map(|&l| self.alphabet[l as usize]).collect()
    }

    /// A two-sided fixed point with at least `right` letters materialized on
    /// the nonnegative side and `left` on the negative side. Shared between
    /// callers through an internal cache.
    pub fn two_sided(&self, right: usize, left: usize) -> Result<Arc<TwoSidedWord>> {
        let mut guard = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(w) = guard.as_ref() {
            if w.right.len() >= right && w.left.len() >= left {
                return Ok(w.clone());
            }
        }
        let (r, l) = match guard.as_ref() {
            Some(w) => (right.max(w.right.len()), left.max(w.left.len())),
            None => (right, left),
        };
        let word = Arc::new(TwoSidedWord::build(self, r, l)?);
        *guard = Some(word.clone());
        Ok(word)
    }
}

fn apply(images: &[Vec<u8>], w: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(w.len() * 2);
    for &l in w {
        out.extend_from_slice(&images[l as usize]);
    }
    out
}

fn substitution_matrix(images: &[Vec<u8>]) -> Vec<Vec<u64>> {
    let n = images.len();
    let mut m = vec![vec![0u64; n]; n];
    for (j, w) in images.iter().enumerate() {
        for &i in w {
            m[i as usize][j] += 1;
        }
    }
    m
}

/// Some power `M^k`, `k ≤ (n−1)² + 1`, is entrywise positive.
fn is_primitive(m: &[Vec<u64>]) -> bool {
    let n = m.len();
    let adj: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x > 0).collect()).collect();
    let mut p = adj.clone();
    for _ in 0..((n - 1) * (n - 1) + 1) {
        if p.iter().all(|r| r.iter().all(|&x| x)) {
            return true;
        }
        let mut q = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if p[i][k] {
                    for j in 0..n {
                        q[i][j] |= adj[k][j];
                    }
                }
            }
        }
        p = q;
    }
    p.iter().all(|r| r.iter().all(|&x| x))
}

/// Power iteration for the Perron eigenpair; the vector is normalized to
/// sum 1.
fn perron_frobenius(m: &[Vec<u64>]) -> (f64, Vec<f64>) {
    let n = m.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 1.0;
    for _ in 0..10_000 {
        // iterate (M + I) to avoid oscillation for periodic-looking spectra
        let mut w: Vec<f64> =
            (0..n).map(|i| v[i] + (0..n).map(|j| m[i][j] as f64 * v[j]).sum::<f64>()).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        let diff: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = w;
        lambda = s - 1.0;
        if diff < 1e-15 {
            break;
        }
    }
    (lambda, v)
}

/// A bi-infinite fixed point `… v₋₂ v₋₁ . u₀ u₁ …` of a primitive
/// substitution.
///
/// The right half is `σ^∞(a)` for the seed letter `a`. The left half is the
/// left-infinite limit of `τ^j(b)` for `τ = σ^m`, where `b` is the first
/// letter (in order of increasing `m`, then alphabet order) with `τ(b)`
/// ending in `b` and `ba` a legal word. For the built-ins this gives the seed
/// pair `a.a` with `m = 2`. Letters beyond the materialized prefixes are
/// found by descending the supertile hierarchy.
#[derive(Debug)]
pub struct TwoSidedWord {
    right: Vec<u8>,
    left: Vec<u8>,
    right_images: Vec<Vec<u8>>,
    right_seed: u8,
    right_lengths: Vec<Vec<u64>>,
    left_images: Vec<Vec<u8>>,
    left_seed: u8,
    left_lengths: Vec<Vec<u64>>,
    pub left_power: usize,
}

fn length_table(images: &[Vec<u8>]) -> Vec<Vec<u64>> {
    let mut table = vec![vec![1u64; images.len()]];
    loop {
        let prev = table.last().expect("nonempty");
        let next: Vec<u64> = images
            .iter()
            .map(|w| w.iter().fold(0u64, |acc, &l| acc.saturating_add(prev[l as usize])))
            .collect();
        let done = next.iter().all(|&x| x >= 1 << 62);
        table.push(next);
        if done || table.len() > 4096 {
            return table;
        }
    }
}

fn descend(images: &[Vec<u8>], lengths: &[Vec<u64>], seed: u8, mut i: u64, from_right_end: bool) -> u8 {
    let mut level = lengths.iter().position(|row| row[seed as usize] > i).expect("index within 2^62");
    let mut c = seed;
    while level > 0 {
        let children = &images[c as usize];
        let lens = &lengths[level - 1];
        let mut pick = None;
        let mut visit = |d: u8, i: &mut u64| {
            if pick.is_none() {
                if *i < lens[d as usize] {
                    pick = Some(d);
                } else {
                    *i -= lens[d as usize];
                }
            }
        };
        if from_right_end {
            children.iter().rev().for_each(|&d| visit(d, &mut i));
        } else {
            children.iter().for_each(|&d| visit(d, &mut i));
        }
        c = pick.expect("index inside supertile");
        level -= 1;
    }
    c
}

impl TwoSidedWord {
    fn build(sub: &Substitution, right: usize, left: usize) -> Result<Self> {
        let images = sub.images.clone();
        let probe = sub.fixed_point(1 << 14);
        let n = images.len();
        let mut found = None;
        'search: for m in 1..=(2 * n).max(2) {
            let tau: Vec<Vec<u8>> = (0..n as u8).map(|b| sub.iterate(b, m)).collect();
            for b in 0..n as u8 {
                let ends = *tau[b as usize].last().expect("nonempty") == b;
                let legal = probe.windows(2).any(|w| w[0] == b && w[1] == sub.seed);
                if ends && legal {
                    found = Some((m, b, tau));
                    break 'search;
                }
            }
        }
        let (m, b, tau) = found.ok_or_else(|| {
            Error::InvalidSystem(format!("no legal left seed for two-sided fixed point of '{}'", sub.name))
        })?;

        let right_word = sub.fixed_point(right.max(1));
        let mut lw = vec![b];
        while lw.len() < left.max(1) {
            lw = apply(&tau, &lw);
        }
        let left_word: Vec<u8> = lw.iter().rev().take(left.max(1)).copied().collect();

        Ok(TwoSidedWord {
            right: right_word,
            left: left_word,
            right_lengths: length_table(&images),
            right_images: images,
            right_seed: sub.seed,
            left_lengths: length_table(&tau),
            left_images: tau,
            left_seed: b,
            left_power: m,
        })
    }

    /// Letter at coordinate `i`.
    pub fn letter(&self, i: i64) -> u8 {
        if i >= 0 {
            let u = i as u64;
            match self.right.get(i as usize) {
                Some(&l) => l,
                None => descend(&self.right_images, &self.right_lengths, self.right_seed, u, false),
            }
        } else {
            let u = (-1 - i) as u64;
            match self.left.get(u as usize) {
                Some(&l) => l,
                None => descend(&self.left_images, &self.left_lengths, self.left_seed, u, true),
            }
        }
    }

    /// Letters at coordinates `start..start+len`.
    pub fn window(&self, start: i64, len: usize) -> Vec<u8> {
        if start >= 0 && (start as usize).saturating_add(len) <= self.right.len() {
            return self.right[start as usize..start as usize + len].to_vec();
        }
        (0..len as i64).map(|j| self.letter(start + j)).collect()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    pub fn left_seed(&self) -> u8 {
        self.left_seed
    }
}
