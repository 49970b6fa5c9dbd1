//! Spectral solver for an incompressible channel flow coupled to a damped
//! fourth-order plate on the upper wall, formulated on the fixed reference
//! domain through a harmonic change of variables.
//!
//! Module map:
//! - [`fields`]: grids, transforms, traces, integrals, norms, snapshots
//! - [`ale`]: interface state, harmonic extension, coefficient matrices
//! - [`plate`]: exact per-mode integration of the damped plate equation
//! - [`pressure`]: elliptic pressure problems (Robin and Neumann forms)
//! - [`euler`]: momentum and vorticity dynamics, velocity reconstruction
//! - [`driver`]: coupled time steppers, window iteration, experiment modes

pub mod ale;
pub mod driver;
pub mod error;
pub mod euler;
pub mod fields;
pub mod linalg;
pub mod ops;
pub mod plate;
pub mod pressure;

pub use error::{Result, SolverError};
