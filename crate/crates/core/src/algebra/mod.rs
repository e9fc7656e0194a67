//! Sequence algebra on finitely supported functions on ℤ, positive definite
//! coefficient windows, and their correspondence with measures on the torus.
//!
//! The torus is parameterized by `z = e^{2πiξ}`, `ξ ∈ [0, 1)`, and a measure
//! `ϱ` corresponds to the sequence `c_n = ∫ zⁿ dϱ(z)`.

mod bochner;
mod measure;
mod sequence;
mod test_function;
mod wiener;

pub use bochner::{bochner_density, fejer_weight};
pub use measure::TorusMeasure;
pub use sequence::{check_positive_definite, PdCheck, PosDefSequence, MAX_TOEPLITZ_DIM, MAX_TRIAL_HALF_WIDTH};
pub use test_function::TestFunction;
pub use wiener::{atom_scan, scan_grid, wiener_atom_mass, wiener_average, wiener_pp_energy, Atom};
