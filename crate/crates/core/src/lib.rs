//! Simulation of resonant pulse propagation, slowing and storage in a warm
//! vapor of three-level Λ atoms.
//!
//! * [`lambda_atom`]: density-matrix model of a single atom.
//! * [`dispersion`]: analytic EIT optics and frequency-domain propagation.
//! * [`vapor`]: cell constants (density, Rabi frequency, Zeeman shift).
//! * [`polarimetry`]: Jones-vector bookkeeping and detector projection.
//! * [`maxwell_bloch`]: field–atom co-propagation and the storage protocol.
//! * [`harness`]: configuration-driven parameter sweeps and fitting.

// `!(x > 0.0)` is the NaN-rejecting form; matrix kernels index explicitly.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dispersion;
pub mod error;
pub mod harness;
pub mod lambda_atom;
pub mod maxwell_bloch;
pub mod polarimetry;
pub mod units;
pub mod vapor;

pub use error::{Error, Result};
