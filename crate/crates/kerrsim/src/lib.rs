//! Simulation toolkit for an optical cavity containing a cross-Kerr medium,
//! driven by a single-photon pulse (mode a) and a coherent probe (mode b).
//!
//! The single-photon-induced probe displacement and its intrinsic noise are
//! computed by three independent, cross-validating routes:
//!
//! - [`analytic`]: closed-form expressions (absorption rate, mean occupation,
//!   conditional displacement statistics, ensemble displacement),
//! - [`trajectory`]: a stochastic jump-process engine sampling absorption and
//!   emission times, with piecewise-exact probe integration,
//! - [`lindblad`]: a cascaded master-equation engine on truncated
//!   tensor-product Fock spaces.
//!
//! [`parity`] builds on these for the two-qubit weak-nonlinearity parity
//! gate, and [`config`]/[`scenario`] provide the CSV-emitting scenario
//! runner behind the `kerrsim` binary.

// Link the BLAS backend used by ndarray's matrix products.
extern crate blas_src;

pub mod analytic;
pub mod config;
pub mod error;
pub mod grid;
pub mod lindblad;
pub mod params;
pub mod parity;
pub mod pulse;
pub mod quad;
pub mod rng;
pub mod scenario;
pub mod trajectory;

pub use error::Error;
pub use grid::{TimeGrid, TimeSeries};
pub use params::SystemParams;
pub use pulse::PulseShape;
pub use rng::RngStream;
