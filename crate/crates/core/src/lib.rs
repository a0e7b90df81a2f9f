//! Photon content and coherent-state fields of classical current distributions.
//!
//! A classical current `j(x, t)` drives the quantized radiation field into a
//! coherent state. This crate computes the photon amplitude `xi(k, t)`, its
//! spectral density, total photon number, energies and phase, and rebuilds
//! the expectation values of `A`, `B` and `E` from the amplitude. Independent
//! classical solvers (Biot-Savart, axial loop field, retarded potentials) are
//! included for cross-checks.

pub mod classical_oracle;
pub mod cli;
pub mod coherent_state;
pub mod config;
pub mod constants;
pub mod current_model;
pub mod error;
pub mod field_reconstruction;
pub mod quadrature;
pub mod validate;
pub mod vector;

pub use error::{Error, Result};
