//! Greedy primal-dual online maximization of concave functions over the
//! nonnegative orthant and the PSD cone.
//!
//! The crate covers four layers:
//!
//! - [`scalar`]: exact one-dimensional concave calculus (values, concave
//!   conjugates, supergradient intervals, the ratio parameter `alpha`).
//! - [`cones`]: multi-coordinate objectives, feasible sets, dual objectives,
//!   the l_p-ball distance penalty, and the log-det state.
//! - [`smoothing`]: closed-form Nesterov smoothings and the optimal-smoothing
//!   designer with its verifier.
//! - [`online`]: the sequential and simultaneous engines, certificates and
//!   duality-gap diagnostics; [`instances`] generates inputs for them.
//!
//! Everything here is `no_std` + `alloc`; file formats and the CLI live in
//! the `smoothgreed` crate.
#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cones;
mod error;
pub mod instances;
pub(crate) mod num;
pub mod online;
pub mod scalar;
pub mod smoothing;

pub use error::{Error, Result};
pub use scalar::{ScalarConcave, SupergradInterval};
