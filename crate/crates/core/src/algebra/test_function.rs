//! Finitely supported sequences on ℤ with convolution and involution.

use num_complex::Complex;

use crate::scalar::Real;

/// A finitely supported complex sequence `φ: ℤ → ℂ`.
///
/// Stored as a window starting at `support_offset`; the first and last
/// stored coefficients are nonzero, and every lag outside the window
/// evaluates to zero. The zero function has an empty window.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T: Real> {
    support_offset: i64,
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> TestFunction<T> {
    pub fn new(support_offset: i64, coefficients: Vec<Complex<T>>) -> Self {
        let mut f = TestFunction { support_offset, coefficients };
        f.trim();
        f
    }

    pub fn from_real(support_offset: i64, coefficients: &[T]) -> Self {
        Self::new(
            support_offset,
            coefficients.iter().map(|&x| Complex::new(x, T::zero())).collect(),
        )
    }

    pub fn zero() -> Self {
        TestFunction { support_offset: 0, coefficients: Vec::new() }
    }

    /// The unit mass `1_n` at lag `n`.
    pub fn delta(n: i64) -> Self {
        TestFunction { support_offset: n, coefficients: vec![Complex::new(T::one(), T::zero())] }
    }

    /// Builds from `(lag, value)` pairs; repeated lags add up.
    pub fn from_pairs(pairs: &[(i64, Complex<T>)]) -> Self {
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::zero();
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let mut coefficients = vec![Complex::new(T::zero(), T::zero()); (hi - lo + 1) as usize];
        for &(n, v) in pairs {
            coefficients[(n - lo) as usize] = coefficients[(n - lo) as usize] + v;
        }
        Self::new(lo, coefficients)
    }

    fn trim(&mut self) {
        let zero = Complex::new(T::zero(), T::zero());
        let Some(first) = self.coefficients.iter().position(|c| *c != zero) else {
            self.coefficients.clear();
            self.support_offset = 0;
            return;
        };
        let last = self.coefficients.iter().rposition(|c| *c != zero).unwrap_or(first);
        self.coefficients.truncate(last + 1);
        self.coefficients.drain(..first);
        self.support_offset += first as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn support_offset(&self) -> i64 {
        self.support_offset
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// Inclusive support bounds, `None` for the zero function.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.support_offset, self.support_offset + self.coefficients.len() as i64 - 1))
        }
    }

    /// Largest `|n|` in the support (0 for the zero function).
    pub fn radius(&self) -> i64 {
        self.support().map(|(lo, hi)| lo.abs().max(hi.abs())).unwrap_or(0)
    }

    pub fn at(&self, n: i64) -> Complex<T> {
        let i = n - self.support_offset;
        if i < 0 || i >= self.coefficients.len() as i64 {
            Complex::new(T::zero(), T::zero())
        } else {
            self.coefficients[i as usize]
        }
    }

    /// Nonzero `(lag, value)` pairs in increasing lag order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        let zero = Complex::new(T::zero(), T::zero());
        self.coefficients
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c != zero)
            .map(move |(i, c)| (self.support_offset + i as i64, *c))
    }

    pub fn l1_norm(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |a, c| a + c.norm())
    }

    pub fn l2_norm_sqr(&self) -> T {
        self.coefficients.iter().fold(T::zero(), |a, c| a + c.norm_sqr())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.support_offset, self.coefficients.iter().map(|c| *c * s).collect())
    }

    /// Translate: `(β_k φ)(n) = φ(n − k)`.
    pub fn translate(&self, k: i64) -> Self {
        TestFunction { support_offset: self.support_offset + k, coefficients: self.coefficients.clone() }
    }

    /// `(φ ∗ ψ)(n) = Σ_k φ(n − k) ψ(k)`.
    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let len = self.coefficients.len() + other.coefficients.len() - 1;
        let mut out = vec![Complex::new(T::zero(), T::zero()); len];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        Self::new(self.support_offset + other.support_offset, out)
    }

    /// `φ̃(n) = conj(φ(−n))`.
    pub fn involute(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let coefficients: Vec<_> = self.coefficients.iter().rev().map(|c| c.conj()).collect();
        let hi = self.support_offset + self.coefficients.len() as i64 - 1;
        TestFunction { support_offset: -hi, coefficients }
    }

    /// `φʳ(n) = φ(−n)`, reflection without conjugation.
    pub fn reflect(&self) -> Self {
        self.involute().conjugate()
    }

    pub fn conjugate(&self) -> Self {
        TestFunction {
            support_offset: self.support_offset,
            coefficients: self.coefficients.iter().map(|c| c.conj()).collect(),
        }
    }

    /// `φ ∗ φ̃`, the autocorrelation of the test function itself.
    pub fn self_correlation(&self) -> Self {
        self.convolve(&self.involute())
    }

    /// The trigonometric polynomial `φ̌(ξ) = Σ_n φ(n) e^{2πinξ}`.
    pub fn fourier(&self, xi: T) -> Complex<T> {
        self.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (n, v)| {
            acc + v * crate::scalar::turn(T::from_i64_lossy(n) * xi)
        })
    }
}

impl<T: Real> std::ops::Add for &TestFunction<T> {
    type Output = TestFunction<T>;

    fn add(self, rhs: Self) -> TestFunction<T> {
        let pairs: Vec<_> = self.iter().chain(rhs.iter()).collect();
        TestFunction::from_pairs(&pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Tf = TestFunction<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn delta_is_identity_for_convolution() {
        assert_eq!(Tf::delta(0).convolve(&Tf::delta(0)), Tf::delta(0));
        assert_eq!(Tf::delta(1).convolve(&Tf::delta(2)), Tf::delta(3));
    }

    #[test]
    fn convolution_by_hand() {
        let phi = Tf::from_real(0, &[1.0, 1.0]);
        let psi = Tf::from_real(0, &[1.0, -1.0]);
        let out = phi.convolve(&psi);
        assert_eq!(out.support(), Some((0, 2)));
        assert_eq!(out.at(0), c(1.0, 0.0));
        assert_eq!(out.at(1), c(0.0, 0.0));
        assert_eq!(out.at(2), c(-1.0, 0.0));
    }

    #[test]
    fn involution_examples() {
        assert_eq!(Tf::delta(4).involute(), Tf::delta(-4));
        let sym = Tf::from_real(-1, &[2.0, 5.0, 2.0]);
        assert_eq!(sym.involute(), sym);
        let f = Tf::new(1, vec![c(0.0, 1.0)]);
        assert_eq!(f.involute(), Tf::new(-1, vec![c(0.0, -1.0)]));
    }

    #[test]
    fn trimming_and_outside_window() {
        let f = Tf::new(-3, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(f.support(), Some((-2, 0)));
        assert_eq!(f.at(-3), c(0.0, 0.0));
        assert_eq!(f.at(7), c(0.0, 0.0));
        assert!(Tf::new(5, vec![c(0.0, 0.0)]).is_zero());
        assert!(Tf::zero().convolve(&Tf::delta(2)).is_zero());
    }

    fn arb_tf() -> impl Strategy<Value = Tf> {
        (-6i64..6, prop::collection::vec((-3i32..4, -3i32..4), 0..7)).prop_map(|(off, v)| {
            Tf::new(off, v.into_iter().map(|(a, b)| c(a as f64, b as f64)).collect())
        })
    }

    proptest! {
        #[test]
        fn involution_is_isometric_involution(f in arb_tf()) {
            prop_assert_eq!(f.involute().involute(), f.clone());
            prop_assert!((f.involute().l1_norm() - f.l1_norm()).abs() < 1e-12);
        }

        #[test]
        fn self_correlation_at_zero_is_energy(f in arb_tf()) {
            let s = f.self_correlation();
            prop_assert_eq!(s.at(0).re, f.l2_norm_sqr());
            prop_assert_eq!(s.at(0).im, 0.0);
        }

        #[test]
        fn convolution_commutes_and_adds_supports(f in arb_tf(), g in arb_tf()) {
            let fg = f.convolve(&g);
            prop_assert_eq!(fg.clone(), g.convolve(&f));
            if let (Some((a, b)), Some((c, d))) = (f.support(), g.support()) {
                // integer coefficients: leading/trailing products cannot cancel
                prop_assert_eq!(fg.support(), Some((a + c, b + d)));
            }
        }
    }
}
