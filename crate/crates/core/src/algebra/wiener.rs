//! Wiener averages: atom masses and the pure point energy of a coefficient
//! window, plus the greedy atom scan built on them.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::PosDefSequence;
use crate::scalar::{circle_distance, turn, wrap_unit, Real};

/// A point mass of a measure on the torus at `e^{2πiξ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T: Real> {
    pub frequency: T,
    pub mass: T,
}

/// `(1/(2K+1)) Σ_{|n|≤K} c_n e^{−2πinξ}` as a complex number.
pub fn wiener_average<T: Real>(c: &PosDefSequence<T>, xi: T) -> Complex<T> {
    let k = c.max_lag() as i64;
    let mut acc = Complex::new(T::zero(), T::zero());
    for n in -k..=k {
        acc = acc + c.at(n) * turn(-T::from_i64_lossy(n) * xi);
    }
    acc / T::from_i64_lossy(2 * k + 1)
}

/// Estimate of the mass the spectral measure puts at `e^{2πiξ}`. For a
/// Hermitian window the Wiener average is real; the real part is returned.
pub fn wiener_atom_mass<T: Real>(c: &PosDefSequence<T>, xi: T) -> T {
    wiener_average(c, xi).re
}

/// `(1/(2K+1)) Σ_{|n|≤K} |c_n|²`, the estimate of `Σ_j m_j²`.
pub fn wiener_pp_energy<T: Real>(c: &PosDefSequence<T>) -> T {
    let sq: Vec<T> = c.window().iter().map(|z| z.norm_sqr()).collect();
    crate::reduce::pairwise_sum(&sq) / T::from_usize_lossy(sq.len())
}

/// Wiener averages at `ξ_j = j/grid` for all `j`, via one FFT. The grid must
/// be at least `2K+1` to avoid aliasing lags.
fn wiener_grid<T: Real>(window: &[Complex<T>], max_lag: usize, grid: usize) -> Vec<T> {
    debug_assert!(grid > 2 * max_lag);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); grid];
    let k = max_lag as i64;
    for n in -k..=k {
        buf[n.rem_euclid(grid as i64) as usize] = window[(n + k) as usize];
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let norm = T::from_i64_lossy(2 * k + 1);
    buf.into_iter().map(|z| z.re / norm).collect()
}

/// Grid actually scanned: the requested one, widened to resolve peaks of
/// width `1/K`.
pub fn scan_grid(max_lag: usize, grid: usize) -> usize {
    grid.max((4 * max_lag.max(1)).next_power_of_two())
}

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let g = T::c((5f64.sqrt() - 1.0) / 2.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if (hi - lo) <= T::epsilon() * T::c(4.0) {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    (lo + hi) * T::c(0.5)
}

/// Detects atoms with mass above `threshold`.
///
/// Repeatedly evaluates the Wiener average of the residual window on a grid,
/// refines the global maximum by golden-section search, records it as an
/// atom and subtracts `m·e^{2πinξ}` from the residual. Subtraction removes
/// the Dirichlet sidelobes of strong atoms before weaker ones are examined.
/// Atoms closer than `1/(4K)` are merged. Output is sorted by frequency and
/// deterministic.
pub fn atom_scan<T: Real>(c: &PosDefSequence<T>, threshold: T, grid: usize) -> Vec<Atom<T>> {
    assert!(threshold > T::zero(), "atom threshold must be positive");
    let k = c.max_lag();
    let grid = scan_grid(k, grid);
    let mut residual = c.window().to_vec();
    let c0 = c.c0();
    let max_atoms = (c0 / threshold).ceil().to_usize().unwrap_or(0).saturating_add(1).min(4096);
    let mut atoms: Vec<Atom<T>> = Vec::new();
    for _ in 0..max_atoms {
        let values = wiener_grid(&residual, k, grid);
        let (j, &peak) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal).then(b.0.cmp(&a.0)))
            .expect("nonempty grid");
        if !(peak > threshold) {
            break;
        }
        let step = T::one() / T::from_usize_lossy(grid);
        let center = T::from_usize_lossy(j) * step;
        let seq = PosDefSequence::from_window_symmetrized(&residual).expect("odd window");
        let refined = golden_max(center - step, center + step, |x| wiener_atom_mass(&seq, x));
        // keep the grid point when refinement does not improve on it
        let (xi, mass) = match wiener_atom_mass(&seq, refined) {
            m if m > peak => (refined, m),
            _ => (center, peak),
        };
        let xi = wrap_unit(xi);
        let kk = k as i64;
        for n in -kk..=kk {
            let idx = (n + kk) as usize;
            residual[idx] = residual[idx] - turn(T::from_i64_lossy(n) * xi) * mass;
        }
        atoms.push(Atom { frequency: xi, mass });
    }
    merge_atoms(atoms, T::one() / T::from_usize_lossy(4 * k.max(1)))
}

fn merge_atoms<T: Real>(mut atoms: Vec<Atom<T>>, radius: T) -> Vec<Atom<T>> {
    atoms.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<Atom<T>> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.frequency - last.frequency < radius => {
                let m = last.mass + a.mass;
                last.frequency = (last.frequency * last.mass + a.frequency * a.mass) / m;
                last.mass = m;
            }
            _ => out.push(a),
        }
    }
    // first and last may be neighbours across ξ = 0
    if out.len() > 1 {
        let (first, last) = (out[0], out[out.len() - 1]);
        if circle_distance(first.frequency, last.frequency) < radius {
            let m = first.mass + last.mass;
            let lifted = first.frequency + T::one();
            let xi = wrap_unit((lifted * first.mass + last.frequency * last.mass) / m);
            out.pop();
            out[0] = Atom { frequency: xi, mass: m };
            out.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap_or(std::cmp::Ordering::Equal));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta0(k: usize) -> PosDefSequence<f64> {
        PosDefSequence::from_fn(k, |n| Complex::new(if n == 0 { 1.0 } else { 0.0 }, 0.0)).unwrap()
    }

    #[test]
    fn lebesgue_has_no_atoms() {
        let c = delta0(100);
        assert!((wiener_atom_mass(&c, 0.3) - 1.0 / 201.0).abs() < 1e-15);
        assert!((wiener_pp_energy(&c) - 1.0 / 201.0).abs() < 1e-15);
        assert!(atom_scan(&c, 0.1, 1024).is_empty());
    }

    #[test]
    fn pure_frequency_atom_is_exact() {
        let xi0 = 0.2;
        let c = PosDefSequence::from_fn(500, |n| turn(n as f64 * xi0)).unwrap();
        assert!((wiener_atom_mass(&c, xi0) - 1.0).abs() < 1e-12);
        assert!((wiener_pp_energy(&c) - 1.0).abs() < 1e-12);
        // off-peak: Dirichlet kernel bound 1/((2K+1)|sin π(ξ−ξ₀)|)
        let xi = xi0 + 0.25;
        let bound = 1.0 / (1001.0 * (std::f64::consts::PI * 0.25).sin());
        assert!(wiener_atom_mass(&c, xi).abs() <= bound + 1e-15);
    }

    #[test]
    fn constant_sequence_has_unit_energy() {
        let c = PosDefSequence::<f64>::from_fn(30, |_| Complex::new(1.0, 0.0)).unwrap();
        assert_eq!(wiener_pp_energy(&c), 1.0);
    }

    #[test]
    fn golden_frequency_scan() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let c = PosDefSequence::from_fn(10_000, |n| turn(n as f64 * alpha)).unwrap();
        let atoms = atom_scan(&c, 0.5, 4096);
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].frequency - alpha).abs() < 1e-6);
        assert!((atoms[0].mass - 1.0).abs() < 0.01);
    }

    #[test]
    fn two_half_atoms() {
        let c = PosDefSequence::from_fn(2000, |n| (Complex::new(1.0, 0.0) + turn(n as f64 / 3.0)) * 0.5).unwrap();
        let atoms = atom_scan(&c, 0.25, 4096);
        assert_eq!(atoms.len(), 2, "{atoms:?}");
        for target in [0.0, 1.0 / 3.0] {
            let a = atoms.iter().find(|a| circle_distance(a.frequency, target) < 1e-6).expect("atom");
            // leakage from the other atom's Dirichlet tail is 1/(2(2K+1))
            assert!((a.mass - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn hermitian_average_is_real() {
        let c = PosDefSequence::from_fn(64, |n| turn(n as f64 * 0.37) * 0.5 + turn(-(n as f64) * 0.11) * 0.5).unwrap();
        for i in 0..50 {
            assert!(wiener_average(&c, i as f64 / 50.0).im.abs() < 1e-12);
        }
    }

    #[test]
    fn merge_across_zero() {
        let atoms = vec![Atom { frequency: 0.0001, mass: 1.0 }, Atom { frequency: 0.9999, mass: 1.0 }];
        let merged = merge_atoms(atoms, 0.01);
        assert_eq!(merged.len(), 1, "{merged:?}");
        assert!(circle_distance(merged[0].frequency, 0.0) < 1e-9, "{merged:?}");
        assert_eq!(merged[0].mass, 2.0);
    }
}
