//! Field representation on the periodic channel: grids, transforms, traces,
//! integrals, diagnostic norms, and snapshot I/O.

pub mod grid;
pub mod norms;
pub mod scalar;
pub mod snapshot;
pub mod spectral;
pub mod vector;

pub use grid::Grid;
pub use norms::{lambda_2d, sobolev_norm_2d, sobolev_norm_3d};
pub use scalar::{Boundary, ScalarField2D, ScalarField3D};
pub use vector::VectorField3D;

/// Restriction of a channel field to one of the two walls.
pub fn trace(field: &ScalarField3D, boundary: Boundary) -> ScalarField2D {
    field.trace(boundary)
}

/// Area average over the moving-interface reference plane.
pub fn mean_gamma1(field: &ScalarField2D) -> f64 {
    field.mean()
}

/// Volume integral over the channel.
pub fn integrate_omega(field: &ScalarField3D) -> f64 {
    field.integrate()
}

/// Partial derivative along a coordinate axis (1, 2 spectral; 3 collocation).
pub fn diff(field: &ScalarField3D, axis: usize) -> ScalarField3D {
    field.diff(axis)
}
