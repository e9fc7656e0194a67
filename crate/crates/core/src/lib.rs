//! Spectral measures of ℤ-actions computed two ways: as Fourier transforms
//! of orbit autocorrelations (diffraction) and from Monte Carlo integration
//! against the invariant measure (spectral side), with the algebraic and
//! almost-periodicity tools needed to compare them.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32` or `f64`);
//! the aliases below fix the scalar for the common cases.

pub mod algebra;
pub mod diffraction;
pub mod error;
pub mod estimators;
pub mod factors;
pub mod io;
pub mod mean_ap;
pub mod reduce;
pub mod rng;
pub mod scalar;
pub mod systems;

pub use num_complex::Complex;
pub use algebra::{Atom, PosDefSequence, TestFunction, TorusMeasure};
pub use diffraction::{DiffractionParams, MeasureDistance, SpectrumReport};
pub use error::{Error, Result};
pub use estimators::{EstimatorParams, WindowConvention};
pub use factors::FactorPoint;
pub use mean_ap::{MeanApParams, Verdict};
pub use scalar::Real;
pub use systems::{Observable, SampledSignal, State, SystemConfig, SystemSpec};

pub type TestFunctionF64 = TestFunction<f64>;
pub type TestFunctionF32 = TestFunction<f32>;
pub type PosDefSequenceF64 = PosDefSequence<f64>;
pub type PosDefSequenceF32 = PosDefSequence<f32>;
pub type TorusMeasureF64 = TorusMeasure<f64>;
pub type TorusMeasureF32 = TorusMeasure<f32>;
pub type ObservableF64 = Observable<f64>;
pub type ObservableF32 = Observable<f32>;
pub type SampledSignalF64 = SampledSignal<f64>;
pub type SampledSignalF32 = SampledSignal<f32>;
pub type FactorPointF64 = FactorPoint<f64>;
pub type FactorPointF32 = FactorPoint<f32>;
