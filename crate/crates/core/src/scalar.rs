//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating point type the library is generic over: `f32` or `f64`.
///
/// `Float` and `Signed` (via `FftNum`) both provide `abs`; use [`Real::mag`]
/// to sidestep the method ambiguity.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + Debug + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn c(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 is representable")
    }

    /// Conversion from a count or index.
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    fn from_i64_lossy(n: i64) -> Self {
        <Self as FromPrimitive>::from_i64(n).expect("i64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn mag(self) -> Self {
        <Self as Float>::abs(self)
    }

    /// Machine epsilon scaled for the "exact" tolerance class: `1e-9` for
    /// `f64`, a looser `1e-4` for `f32`.
    fn exact_tol() -> Self;
}

impl Real for f32 {
    fn exact_tol() -> Self {
        1e-4
    }
}

impl Real for f64 {
    fn exact_tol() -> Self {
        1e-9
    }
}

/// `e^{2πi·turns}` with the argument first reduced mod 1, which keeps the
/// phase accurate when `turns` is a large multiple of a frequency.
pub fn turn<T: Real>(turns: T) -> Complex<T> {
    let r = turns - turns.floor();
    let theta = T::TAU() * r;
    Complex::new(theta.cos(), theta.sin())
}

/// Reduce a frequency into `[0, 1)`.
pub fn wrap_unit<T: Real>(xi: T) -> T {
    let r = xi - xi.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Distance between two points of the circle `ℝ/ℤ`.
pub fn circle_distance<T: Real>(a: T, b: T) -> T {
    let d = wrap_unit(a - b);
    d.min(T::one() - d)
}
