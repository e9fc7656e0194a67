//! Fejér-smoothed Fourier inversion of a coefficient window.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::PosDefSequence;
use crate::error::{precondition, Result};
use crate::scalar::Real;

/// Fejér weight `1 − |n|/(L+1)`.
pub fn fejer_weight<T: Real>(n: i64, order: usize) -> T {
    let l = order as i64;
    if n.abs() > l {
        T::zero()
    } else {
        T::one() - T::from_i64_lossy(n.abs()) / T::from_usize_lossy(order + 1)
    }
}

/// Samples of `d(ξ) = Σ_{|n|≤L} (1 − |n|/(L+1)) c_n e^{−2πinξ}` at
/// `ξ_j = j/grid`.
///
/// The Fejér kernel is nonnegative, so `d ≥ 0` whenever `c` is positive
/// definite. Since `grid > 2L` there is no aliasing and the grid mean is
/// exactly `c_0`.
pub fn bochner_density<T: Real>(c: &PosDefSequence<T>, grid: usize, kernel_order: usize) -> Result<Vec<T>> {
    precondition(
        kernel_order <= c.max_lag(),
        format!("kernel order {kernel_order} exceeds max lag {}", c.max_lag()),
    )?;
    precondition(
        grid >= 4 * kernel_order && grid > 2 * kernel_order,
        format!("grid {grid} must be at least 4·L = {}", 4 * kernel_order),
    )?;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); grid];
    for n in -(kernel_order as i64)..=kernel_order as i64 {
        let idx = n.rem_euclid(grid as i64) as usize;
        buf[idx] = buf[idx] + c.at(n) * fejer_weight::<T>(n, kernel_order);
    }
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}
