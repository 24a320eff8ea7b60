//! Mixing of classical and continuous-time quantum walks on periodic lattices
//! `Z_{n1} x ... x Z_{nd}`.
//!
//! Everything here is exact up to double precision: cycle amplitudes come from
//! the circulant eigen-decomposition, time averages are integrated term by term
//! in closed form, and every closed-form path has an independent quadrature or
//! brute-force counterpart that the tests compare against.
//!
//! Module map:
//!
//! - [`lattice`] and [`spectral`]: lattice descriptions, cycle eigenphases,
//!   amplitudes `<q|e^{iAt}|p>` and the spectral gap.
//! - [`kernels`]: stochastic kernels induced by position measurement
//!   (instantaneous, time-averaged, powers), stored by first column.
//! - [`distances`]: total variation, pairwise column distance `d(P)`,
//!   threshold-mixing helpers and grid mixing-time search.
//! - [`classical`]: the lazy random walk, its exact mixing curve and the
//!   coordinate coupling simulation.
//! - [`trig_sums`]: the oscillatory sums `n(t)`, their exact integrals, and the
//!   product-integral bound sweep.
//! - [`experiments`]: end-to-end mixing procedures (repeated measurement,
//!   coordinate-wise evolution, the two-cycle case checks, return-probability
//!   comparison).

pub mod classical;
pub mod distances;
mod error;
pub mod experiments;
pub mod integrate;
pub mod kernels;
pub mod lattice;
pub mod spectral;
pub mod trig_sums;

pub use error::{Error, Result};
pub use lattice::{CycleSpec, LatticeSpec};
pub use num_complex::Complex64;
