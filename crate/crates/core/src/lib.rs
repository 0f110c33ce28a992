//! Simulation laboratory for hitting times of Gaussian processes.
//!
//! The crate samples exact Gaussian paths ([`simulate`]), extracts first
//! passages and the full record-time decomposition of `y ↦ τ_y`
//! ([`hitting`]), and estimates hitting-time functionals by Monte Carlo
//! ([`estimators`]) for comparison against closed forms ([`oracles`]).

pub mod error;
pub mod estimators;
pub mod hitting;
pub mod kernels;
pub mod oracles;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::Kernel;
