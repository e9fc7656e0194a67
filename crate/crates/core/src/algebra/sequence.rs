//! Positive definite coefficient windows and their quadratic forms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;

use super::TestFunction;
use crate::error::{precondition, Result};
use crate::rng;
use crate::scalar::Real;

/// A Hermitian coefficient window `c_{-K..=K}`, the finite view of a
/// positive definite sequence `n ↦ ⟨Uⁿf, f⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosDefSequence<T: Real> {
    max_lag: usize,
    coefficients: Vec<Complex<T>>,
    stderr: Option<Vec<T>>,
}

impl<T: Real> PosDefSequence<T> {
    /// Builds from `c_0, …, c_K`; negative lags are the conjugates.
    ///
    /// `c_0` is forced real by dropping its imaginary part.
    pub fn from_nonnegative(lags: &[Complex<T>]) -> Result<Self> {
        precondition(!lags.is_empty(), "at least c_0 is required")?;
        let k = lags.len() - 1;
        let mut coefficients = Vec::with_capacity(2 * k + 1);
        coefficients.extend(lags[1..].iter().rev().map(|c| c.conj()));
        coefficients.push(Complex::new(lags[0].re, T::zero()));
        coefficients.extend_from_slice(&lags[1..]);
        precondition(lags[0].re >= T::zero(), "c_0 must be nonnegative")?;
        Ok(PosDefSequence { max_lag: k, coefficients, stderr: None })
    }

    /// Builds from the full window `c_{-K}, …, c_K`, projecting onto the
    /// Hermitian part `(c_n + conj(c_{-n}))/2`.
    pub fn from_window_symmetrized(window: &[Complex<T>]) -> Result<Self> {
        precondition(window.len() % 2 == 1, "window length must be odd")?;
        let k = window.len() / 2;
        let half = T::c(0.5);
        let lags: Vec<Complex<T>> =
            (0..=k).map(|n| (window[k + n] + window[k - n].conj()) * half).collect();
        Self::from_nonnegative(&lags)
    }

    /// `c_n = f(n)` for a closed-form generator, Hermitian by construction
    /// on the nonnegative lags.
    pub fn from_fn(max_lag: usize, f: impl Fn(i64) -> Complex<T>) -> Result<Self> {
        let lags: Vec<_> = (0..=max_lag as i64).map(f).collect();
        Self::from_nonnegative(&lags)
    }

    pub fn with_stderr(mut self, stderr: Vec<T>) -> Self {
        debug_assert_eq!(stderr.len(), self.max_lag + 1);
        self.stderr = Some(stderr);
        self
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// `c_n`, or `None` outside `|n| ≤ K`.
    pub fn get(&self, n: i64) -> Option<Complex<T>> {
        let k = self.max_lag as i64;
        (n.abs() <= k).then(|| self.coefficients[(n + k) as usize])
    }

    /// `c_n`; panics outside the window.
    pub fn at(&self, n: i64) -> Complex<T> {
        self.get(n).unwrap_or_else(|| panic!("lag {n} outside window ±{}", self.max_lag))
    }

    pub fn c0(&self) -> T {
        self.coefficients[self.max_lag].re
    }

    /// Full window `c_{-K..=K}`.
    pub fn window(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// `c_0, …, c_K`.
    pub fn nonnegative(&self) -> &[Complex<T>] {
        &self.coefficients[self.max_lag..]
    }

    /// Per-lag standard errors for `n = 0..=K`, when estimated.
    pub fn stderr(&self) -> Option<&[T]> {
        self.stderr.as_deref()
    }

    /// Restrict to a smaller lag window.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        precondition(k <= self.max_lag, format!("cannot truncate ±{} to ±{k}", self.max_lag))?;
        let mut out = Self::from_nonnegative(&self.nonnegative()[..=k])?;
        if let Some(se) = &self.stderr {
            out.stderr = Some(se[..=k].to_vec());
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(i64, Complex<T>) -> Complex<T>) -> Result<Self> {
        let lags: Vec<_> = self.nonnegative().iter().enumerate().map(|(n, c)| f(n as i64, *c)).collect();
        Self::from_nonnegative(&lags)
    }

    /// Checks the structural invariants: Hermitian symmetry, real
    /// nonnegative `c_0`, and `|c_n| ≤ c_0`, all up to `tol·max(c_0, 1)`.
    pub fn validate(&self, tol: T) -> Result<()> {
        let c0 = self.c0();
        let scale = tol * c0.max(T::one());
        precondition(self.coefficients[self.max_lag].im.mag() <= scale, "c_0 is not real")?;
        precondition(c0 >= -scale, "c_0 is negative")?;
        for n in 1..=self.max_lag as i64 {
            let (p, m) = (self.at(n), self.at(-n));
            precondition((p - m.conj()).norm() <= scale, format!("Hermitian symmetry fails at lag {n}"))?;
            precondition(p.norm() <= c0 + scale, format!("|c_{n}| exceeds c_0"))?;
        }
        Ok(())
    }

    /// `Σ_n c(n) (φ ∗ ψ̃)(n)`, the sesquilinear form `⟨𝒩(φ), 𝒩(ψ)⟩` seen from
    /// the coefficient side.
    pub fn pairing(&self, phi: &TestFunction<T>, psi: &TestFunction<T>) -> Result<Complex<T>> {
        let kernel = phi.convolve(&psi.involute());
        precondition(
            kernel.radius() <= self.max_lag as i64,
            format!("φ∗ψ̃ reaches lag {} beyond window ±{}", kernel.radius(), self.max_lag),
        )?;
        Ok(kernel.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (n, v)| acc + self.at(n) * v))
    }

    /// `Q(φ) = Σ_n c(n) (φ ∗ φ̃)(n)`; nonnegative for positive definite `c`.
    pub fn quadratic_form(&self, phi: &TestFunction<T>) -> Result<T> {
        Ok(self.pairing(phi, phi)?.re)
    }

    /// The `d × d` Toeplitz matrix `[c_{i−j}]` in double precision.
    pub fn toeplitz(&self, d: usize) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(d, d, |i, j| {
            let c = self.at(i as i64 - j as i64);
            Complex::new(c.re.to_f64_lossy(), c.im.to_f64_lossy())
        })
    }
}

/// Outcome of [`check_positive_definite`]. Quadratic forms are evaluated on
/// unit-ℓ² test functions, so they are directly comparable to `c_0`.
#[derive(Debug, Clone)]
pub struct PdCheck<T: Real> {
    /// Smallest value over randomized trials and the eigenvalue check.
    pub min_quadratic_form: T,
    pub min_random: T,
    /// Smallest eigenvalue of the leading Toeplitz block.
    pub min_eigenvalue: T,
    pub toeplitz_dim: usize,
    /// A test function with a quadratic form below `-tol·c_0`, if any.
    pub witness: Option<TestFunction<T>>,
}

/// Largest Toeplitz block handed to the dense eigensolver.
pub const MAX_TOEPLITZ_DIM: usize = 512;
/// Largest half-width of the random test functions.
pub const MAX_TRIAL_HALF_WIDTH: usize = 128;

/// Randomized plus deterministic positive definiteness check.
///
/// Draws `trials` random test functions supported in `[−K/2, K/2]` and takes
/// the minimum eigenvalue of the `(K/2+1)`-dimensional Toeplitz matrix. A
/// witness is returned when the minimum drops below `-tol·c_0`, with `tol`
/// the exact-path tolerance of the scalar type.
pub fn check_positive_definite<T: Real>(c: &PosDefSequence<T>, trials: usize, seed: u64) -> Result<PdCheck<T>> {
    precondition(trials >= 1, "trials must be at least 1")?;
    let half = (c.max_lag() / 2).min(MAX_TRIAL_HALF_WIDTH) as i64;
    let mut rng = rng::stream(seed, "pd-check", 0);
    let mut min_random = T::infinity();
    let mut min_phi = TestFunction::zero();
    for _ in 0..trials {
        let coeffs: Vec<Complex<T>> = (0..(2 * half + 1))
            .map(|_| Complex::new(T::c(rng.random_range(-1.0..1.0)), T::c(rng.random_range(-1.0..1.0))))
            .collect();
        let phi = TestFunction::new(-half, coeffs);
        let norm = phi.l2_norm_sqr().sqrt();
        if norm == T::zero() {
            continue;
        }
        let phi = phi.scale(Complex::new(T::one() / norm, T::zero()));
        let q = c.quadratic_form(&phi)?;
        if q < min_random {
            min_random = q;
            min_phi = phi;
        }
    }

    let dim = (c.max_lag() / 2 + 1).min(MAX_TOEPLITZ_DIM);
    let eig = SymmetricEigen::new(c.toeplitz(dim));
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let min_eigenvalue = T::c(lmin);

    let tol = T::exact_tol() * c.c0().max(T::min_positive_value());
    let witness = if min_eigenvalue < min_random {
        (min_eigenvalue < -tol).then(|| {
            let v = eig.eigenvectors.column(imin);
            // v^H T v = Q(conj v) for T_{ij} = c_{i−j}
            TestFunction::new(0, v.iter().map(|z| Complex::new(T::c(z.re), T::c(-z.im))).collect())
        })
    } else {
        (min_random < -tol).then_some(min_phi)
    };
    Ok(PdCheck {
        min_quadratic_form: min_random.min(min_eigenvalue),
        min_random,
        min_eigenvalue,
        toeplitz_dim: dim,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::turn;

    #[test]
    fn hermitian_extension() {
        let c = PosDefSequence::from_nonnegative(&[Complex::new(2.0, 0.3), Complex::new(0.5, 0.25)]).unwrap();
        assert_eq!(c.at(-1), Complex::new(0.5, -0.25));
        assert_eq!(c.at(0), Complex::new(2.0, 0.0));
        assert!(c.get(2).is_none());
        c.validate(1e-12).unwrap();
    }

    #[test]
    fn kronecker_delta_is_positive_definite() {
        let c = PosDefSequence::<f64>::from_fn(20, |n| Complex::new(if n == 0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let r = check_positive_definite(&c, 200, 1).unwrap();
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-12);
        assert!(r.min_quadratic_form >= 0.0);
        assert!(r.witness.is_none());
    }

    #[test]
    fn pure_frequency_quadratic_form_is_squared_modulus() {
        let xi0 = 0.3183;
        let c = PosDefSequence::<f64>::from_fn(16, |n| turn(n as f64 * xi0)).unwrap();
        let phi = TestFunction::new(
            -2,
            vec![Complex::new(0.3, 1.0), Complex::new(-1.0, 0.5), Complex::new(2.0, 0.0), Complex::new(0.1, -0.7)],
        );
        // Σ c(a−b) φ(a) conj φ(b) = |Σ φ(k) e^{2πikξ₀}|²
        let closed = phi.fourier(xi0).norm_sqr();
        assert!((c.quadratic_form(&phi).unwrap() - closed).abs() < 1e-12);
        let r = check_positive_definite(&c, 500, 2).unwrap();
        assert!(r.min_quadratic_form >= -1e-9);
        assert!(r.witness.is_none());
    }

    #[test]
    fn single_lag_window_is_nonnegative() {
        // K = 1 gives a 1×1 Toeplitz block and test functions supported at 0
        let c = PosDefSequence::<f64>::from_nonnegative(&[Complex::new(1.0, 0.0), Complex::new(0.8, 0.0)]).unwrap();
        let r = check_positive_definite(&c, 100, 5).unwrap();
        assert_eq!(r.toeplitz_dim, 1);
        assert!(r.min_quadratic_form >= 0.0);
    }

    #[test]
    fn three_by_three_toeplitz() {
        // eigenvalues of [[1,.8,0],[.8,1,.8],[0,.8,1]] are 1 and 1 ± 0.8·√2
        let c = PosDefSequence::<f64>::from_nonnegative(&[
            Complex::new(1.0, 0.0),
            Complex::new(0.8, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
        ])
        .unwrap();
        let r = check_positive_definite(&c, 100, 3).unwrap();
        assert_eq!(r.toeplitz_dim, 3);
        let oracle = 1.0 - 0.8 * 2f64.sqrt();
        assert!((r.min_eigenvalue - oracle).abs() < 1e-12);
        assert!(r.min_eigenvalue < 0.0);
        assert!(r.witness.is_some());
    }

    #[test]
    fn indefinite_sequence_has_a_witness() {
        let c = PosDefSequence::<f64>::from_nonnegative(&[Complex::new(1.0, 0.0), Complex::new(0.9, 0.0), Complex::new(-0.9, 0.0)])
            .unwrap();
        let r = check_positive_definite(&c, 100, 4).unwrap();
        let w = r.witness.expect("witness");
        assert!(c.quadratic_form(&w).unwrap() < -1e-3);
    }
}
