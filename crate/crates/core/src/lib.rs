//! Deterministic simulation and estimation toolkit for multiparty quantum
//! clock synchronization.
//!
//! A shared W or Dicke register is measured by the standard clock in the
//! dual basis `(|pos⟩, |neg⟩)`; the outcome is broadcast and every other
//! party measures its own qubit at its local `t = 0`, which lags the
//! standard clock by `Δ`. The conditional probability
//! `P(pos) = 1/2 + A₀·cos(ωΔ)` lets each party recover its offset.
//!
//! Basis convention: `σ_z|0⟩ = +|0⟩`, evolution is `e^{-iHt}`, and qubit 0
//! is the most significant bit of a basis index (leftmost in ket strings).

pub mod cli;
pub mod error;
pub mod estimator;
pub mod hamiltonian;
pub mod protocol;
pub mod qsim;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
