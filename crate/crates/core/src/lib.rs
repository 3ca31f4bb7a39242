//! Spectral toolkit for the symmetric triple-well potential
//! V(q) = q^2 (1 - g^2 q^2)^2 / 2.
//!
//! * [`numerics`]: exact rationals, multiprecision reals, Gamma/digamma and
//!   branch-controlled complex powers.
//! * [`bender_wu`]: exact perturbation series around the central and side wells.
//! * [`nonpert`]: closed-form nonperturbative level shifts (valley-method and
//!   dilute-gas formulas).
//! * [`asymptotics`]: large-order predictions, dispersion relation, optimal
//!   truncation.
//! * [`spectral`]: certified multiprecision eigenvalues of the Hamiltonian.
//! * [`wkb`]: the leading-order WKB quantization condition and its roots.

pub mod asymptotics;
pub mod bender_wu;
pub mod nonpert;
pub mod numerics;
pub mod parallel;
pub mod spectral;
pub mod wkb;

pub use numerics::{Branch, Precision};
