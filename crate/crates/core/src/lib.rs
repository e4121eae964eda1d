//! Inverse design of pixelated 2x2 silicon-photonic devices and behavioral
//! simulation of the switch fabrics built from them.
//!
//! The crate is layered bottom-up:
//!
//! - [`em`]: 2D frequency-domain scalar Helmholtz solver with PML, slab modes
//!   and modal monitors.
//! - [`topopt`]: density filtering, projection, objective and adjoint gradient,
//!   optimization loop.
//! - [`devices`]: splitter, crossover and add-drop resonator design problems,
//!   metrics, sweeps and Lorentzian fitting.
//! - [`netsim`]: 2x2 behavioral scattering models and the transfer-matrix engine.
//! - [`fabric`]: parallel-rail layout generators for the switch architectures.
//! - [`routing`]: switch-state solvers and the path-trace oracle.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod devices;
pub mod em;
pub mod fabric;
pub mod netsim;
pub mod routing;
pub mod table;
pub mod topopt;

pub use num_complex::Complex64;

/// Crate version, embedded in exported artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
