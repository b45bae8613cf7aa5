//! Weak values and α-parameterized quasiprobability (QP) distributions on
//! finite-dimensional Hilbert spaces, a discretized Bohmian-mechanics
//! simulator built on top of them, and an ontological-model layer that
//! classifies the resulting model.
//!
//! Module map:
//!
//! * [`hilbert`] — states, observables, spectral projectors, tensor products.
//! * [`alpha`] — the `∘_α` operator product `αXY + (1−α)YX`.
//! * [`quasiprob`] — weak values, conditional / joint / marginal QPs.
//! * [`bohm`] — 1D grid wavefunctions, Crank–Nicolson evolution, guiding
//!   equation, local values and trajectory ensembles.
//! * [`ontology`] — epistemic states, indicator functions and the
//!   synlogicality classification, plus the two-particle analysis.
//! * [`random`] — seeded generators for random states, observables and α.

pub mod alpha;
pub mod bohm;
pub mod error;
pub mod hilbert;
pub mod ontology;
pub mod quasiprob;
pub mod random;

pub use alpha::AlphaParam;
pub use error::{Error, Result};
pub use hilbert::{CMatrix, CVector, DensityOperator, Observable, SpectralDecomposition, StateVector};
pub use num_complex::Complex64;
pub use quasiprob::QpDistribution;

/// Max-entry norm `max |m_ij|`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry distance between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}
