//! Classical simulator for quantum kernel ridge regression by entanglement
//! spectrum transformation.
//!
//! Data flows `dataset` → `encoding` → `spectrum`; the matrix inversion is
//! simulated both through the two-qumode post-selection channel (`cv`) and
//! through sampled-copy density matrix exponentiation (`dme`). `ion` checks
//! the trapped-ion gate constructions on a truncated Fock space.

pub mod cv;
pub mod dataset;
pub mod dme;
pub mod encoding;
pub mod error;
pub mod ion;
pub mod seed;
pub mod spectrum;

pub use error::{Error, Result};
