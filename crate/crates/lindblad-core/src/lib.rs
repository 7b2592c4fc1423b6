//! Numerical analysis of Lindblad generators `L_ε = L₀ + ε L₁`:
//! stationary states via spectral projectors and perturbative expansions,
//! first-order spectral stability, and entanglement certification of the
//! resulting asymptotic states by partial transposition.

pub mod asymptotics;
pub mod entanglement;
pub mod error;
pub mod generator;
pub mod matrix;
pub mod perturbation;
pub mod scenarios;
pub mod schema;
pub mod stability;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{LindbladError, Result};
