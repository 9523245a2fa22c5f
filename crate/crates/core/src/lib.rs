//! Band structure of the tight-binding zigzag nanoribbon `Δ + V` in a
//! transverse potential.
//!
//! The periodic operator reduces to the tridiagonal family `J_a`,
//! `a = 2|cos(t/2)| ∈ [0, 2]`, and its spectrum is the union of the bands
//! `σ_k = λ_k([0, 2])`. The crate computes those bands, checks them against
//! brute-force finite sections, and evaluates weak- and strong-field
//! asymptotics.

pub mod asymptotics;
pub mod bands;
pub mod cli;
pub mod error;
pub mod jacobi;
pub mod lattice;
pub mod oracle;
pub mod search;

pub use error::{Error, Result};
