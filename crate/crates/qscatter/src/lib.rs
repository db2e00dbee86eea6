//! One-dimensional scattering off an excitable point defect, and the
//! entanglement (concurrence) of two fermions scattered by it.
//!
//! Natural units `hbar^2/2m = 1` throughout: every energy is a momentum
//! squared, and all inputs are expressed relative to the elastic strength
//! `u0` (momentum), the coupling ratio `g = u1/u0`, and the dimensionless
//! excitation energy `e_exc`.
//!
//! Layering, bottom to top:
//! - [`cxmat`]: minimal 2x2 / 4x4 complex-matrix kernel.
//! - [`scattering`]: one-particle amplitudes, thresholds, zeros, S-matrix poles.
//! - [`twobody`]: two-fermion S matrix, its dual, W matrix, and concurrences.
//! - [`experiments`]: parameter sweeps, feature locators, and the verification suite.

pub mod cxmat;
pub mod experiments;
pub mod scattering;
pub mod twobody;

pub use num_complex::Complex64;
