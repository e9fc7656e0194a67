//! Measures on the torus `𝕋 ≅ [0, 1)`: atoms plus a sampled density.

use num_complex::Complex;

use super::Atom;
use crate::error::{precondition, Error, Result};
use crate::scalar::{turn, Real};

/// A measure on the torus, split into a pure point part and a continuous
/// part sampled on the grid `ξ_j = j/grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusMeasure<T: Real> {
    pub atoms: Vec<Atom<T>>,
    /// Nonnegative density samples at `ξ_j = j/len`.
    pub density: Vec<T>,
    /// Fejér order used to smooth the continuous part.
    pub kernel_order: usize,
    pub total_mass: T,
    /// Lag window the measure was recovered from.
    pub max_lag: usize,
    /// Mass removed by clipping negative density samples.
    pub clipped_mass: T,
}

impl<T: Real> TorusMeasure<T> {
    pub fn grid(&self) -> usize {
        self.density.len()
    }

    pub fn atomic_mass(&self) -> T {
        self.atoms.iter().fold(T::zero(), |a, x| a + x.mass)
    }

    /// Quadrature mass of the density (grid mean).
    pub fn continuous_mass(&self) -> T {
        crate::reduce::pairwise_sum(&self.density) / T::from_usize_lossy(self.density.len().max(1))
    }

    /// `total_mass − atoms − density`.
    pub fn mass_mismatch(&self) -> T {
        self.total_mass - self.atomic_mass() - self.continuous_mass()
    }

    /// `∫ zⁿ dμ` with the density integrated by the grid rule, which is exact
    /// for trigonometric polynomials of degree below the grid size.
    pub fn fourier_coefficient(&self, n: i64) -> Complex<T> {
        let nn = T::from_i64_lossy(n);
        let atoms = self
            .atoms
            .iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, a| acc + turn(nn * a.frequency) * a.mass);
        let g = self.density.len();
        if g == 0 {
            return atoms;
        }
        let gg = T::from_usize_lossy(g);
        let mut re = Vec::with_capacity(g);
        let mut im = Vec::with_capacity(g);
        for (j, d) in self.density.iter().enumerate() {
            // reduce n·j mod g exactly before forming the phase
            let r = (n.rem_euclid(g as i64) as u128 * j as u128 % g as u128) as usize;
            let z = turn(T::from_usize_lossy(r) / gg) * *d;
            re.push(z.re);
            im.push(z.im);
        }
        let dens = Complex::new(crate::reduce::pairwise_sum(&re), crate::reduce::pairwise_sum(&im)) / gg;
        atoms + dens
    }

    /// Cumulative distribution on the grid: `F(ξ_j) = μ([0, ξ_j])`, density
    /// integrated by the trapezoid rule, atoms counted when `ξ ≤ ξ_j`.
    pub fn cdf(&self) -> Vec<T> {
        let g = self.density.len();
        let gg = T::from_usize_lossy(g);
        let half = T::c(0.5);
        let mut out = Vec::with_capacity(g);
        let mut cont = T::zero();
        let mut atoms: Vec<&Atom<T>> = self.atoms.iter().collect();
        atoms.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap_or(std::cmp::Ordering::Equal));
        let mut ai = 0;
        let mut point = T::zero();
        for j in 0..g {
            if j > 0 {
                cont = cont + (self.density[j - 1] + self.density[j]) * half / gg;
            }
            let xi = T::from_usize_lossy(j) / gg;
            while ai < atoms.len() && atoms[ai].frequency <= xi {
                point = point + atoms[ai].mass;
                ai += 1;
            }
            out.push(cont + point);
        }
        out
    }

    /// Structural invariants: distinct positive atoms, nonnegative density,
    /// and atom mass not exceeding the total.
    pub fn validate(&self, tol: T) -> Result<()> {
        for a in &self.atoms {
            precondition(a.mass > T::zero(), "atom masses must be positive")?;
            precondition(a.frequency >= T::zero() && a.frequency < T::one(), "atom frequency outside [0,1)")?;
        }
        for w in self.atoms.windows(2) {
            precondition(w[0].frequency != w[1].frequency, "atom frequencies must be distinct")?;
        }
        precondition(self.density.iter().all(|d| *d >= T::zero()), "density must be nonnegative")?;
        let slack = tol * self.total_mass.max(T::one());
        if self.atomic_mass() > self.total_mass + slack {
            return Err(Error::OverDetection {
                detected: self.atomic_mass().to_f64_lossy(),
                total: self.total_mass.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Normalized Lebesgue measure scaled by `mass`.
    pub fn lebesgue(mass: T, grid: usize) -> Self {
        TorusMeasure {
            atoms: Vec::new(),
            density: vec![mass; grid],
            kernel_order: 0,
            total_mass: mass,
            max_lag: 0,
            clipped_mass: T::zero(),
        }
    }

    /// A single point mass.
    pub fn dirac(frequency: T, mass: T, grid: usize) -> Self {
        TorusMeasure {
            atoms: vec![Atom { frequency: crate::scalar::wrap_unit(frequency), mass }],
            density: vec![T::zero(); grid],
            kernel_order: 0,
            total_mass: mass,
            max_lag: 0,
            clipped_mass: T::zero(),
        }
    }
}
