//! Spectral toolkit for linear physical models written in canonical form
//! `J = L E − s` with `E` and `J` constrained to complementary subspaces
//! picked out by a projection `Γ₁`.

pub mod error;
pub mod field;
pub mod grid;
pub mod catalog;
pub mod cli;
pub mod projections;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
