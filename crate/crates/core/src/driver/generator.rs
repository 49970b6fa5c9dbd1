//! Admissible initial-data builders.
//!
//! Velocities come from flat vector potentials with a vertical envelope that
//! vanishes at the bottom wall; the interface velocity is the trace of the
//! vertical component, so every generated pair passes the validation gate by
//! construction.

use crate::fields::scalar::{Boundary, ScalarField2D, ScalarField3D};
use crate::fields::spectral::TWO_PI;
use crate::fields::vector::VectorField3D;
use crate::fields::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct InitialData {
    pub v0: VectorField3D,
    pub w0: ScalarField2D,
    pub w1: ScalarField2D,
}

impl InitialData {
    pub fn zero(grid: &Arc<Grid>) -> Self {
        Self {
            v0: VectorField3D::zeros(grid),
            w0: ScalarField2D::zeros(grid),
            w1: ScalarField2D::zeros(grid),
        }
    }
}

/// Smooth envelope: 0 at the bottom, 1 on the interface, flat at both walls.
fn envelope(x3: f64) -> f64 {
    x3 * x3 * (3.0 - 2.0 * x3)
}

fn envelope_d(x3: f64) -> f64 {
    6.0 * x3 * (1.0 - x3)
}

/// Horizontal shear with a polynomial profile; carries no interface motion.
pub fn shear(grid: &Arc<Grid>, amplitude: f64) -> InitialData {
    InitialData {
        v0: VectorField3D::new(
            ScalarField3D::from_fn(grid, |_, _, x3| amplitude * x3 * x3 * (1.0 - 0.5 * x3)),
            ScalarField3D::zeros(grid),
            ScalarField3D::zeros(grid),
        ),
        w0: ScalarField2D::zeros(grid),
        w1: ScalarField2D::zeros(grid),
    }
}

/// One oscillating interface mode with the matching incompressible velocity.
pub fn single_mode(grid: &Arc<Grid>, amplitude: f64, k1: i64, k2: i64) -> InitialData {
    mode_with_phase(grid, amplitude, k1, k2, 0.0)
}

fn mode_with_phase(grid: &Arc<Grid>, amplitude: f64, k1: i64, k2: i64, phase: f64) -> InitialData {
    assert!(k1 != 0 || k2 != 0, "the interface mode must oscillate");
    let ksq = (k1 * k1 + k2 * k2) as f64;
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let theta = move |x1: f64, x2: f64| TWO_PI * (k1f * x1 + k2f * x2) + phase;
    let v1 = ScalarField3D::from_fn(grid, |x1, x2, x3| {
        -amplitude * k1f / (TWO_PI * ksq) * envelope_d(x3) * theta(x1, x2).sin()
    });
    let v2 = ScalarField3D::from_fn(grid, |x1, x2, x3| {
        -amplitude * k2f / (TWO_PI * ksq) * envelope_d(x3) * theta(x1, x2).sin()
    });
    let v3 = ScalarField3D::from_fn(grid, |x1, x2, x3| amplitude * envelope(x3) * theta(x1, x2).cos());
    let w1 = v3.trace(Boundary::Gamma1);
    InitialData { v0: VectorField3D::new(v1, v2, v3), w0: ScalarField2D::zeros(grid), w1 }
}

/// Incompressible velocity whose vertical component vanishes on both walls;
/// compatible with a resting interface.
pub fn interior_mode(grid: &Arc<Grid>, amplitude: f64, k1: i64, k2: i64) -> InitialData {
    assert!(k1 != 0 || k2 != 0);
    let ksq = (k1 * k1 + k2 * k2) as f64;
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let chi = |x3: f64| 16.0 * x3 * x3 * (1.0 - x3) * (1.0 - x3);
    let chi_d = |x3: f64| 32.0 * x3 * (1.0 - x3) * (1.0 - 2.0 * x3);
    let theta = move |x1: f64, x2: f64| TWO_PI * (k1f * x1 + k2f * x2);
    let v1 = ScalarField3D::from_fn(grid, |x1, x2, x3| {
        -amplitude * k1f / (TWO_PI * ksq) * chi_d(x3) * theta(x1, x2).sin()
    });
    let v2 = ScalarField3D::from_fn(grid, |x1, x2, x3| {
        -amplitude * k2f / (TWO_PI * ksq) * chi_d(x3) * theta(x1, x2).sin()
    });
    let v3 = ScalarField3D::from_fn(grid, |x1, x2, x3| amplitude * chi(x3) * theta(x1, x2).cos());
    InitialData {
        v0: VectorField3D::new(v1, v2, v3),
        w0: ScalarField2D::zeros(grid),
        w1: ScalarField2D::zeros(grid),
    }
}

/// Superposition of `count` random low modes at the given overall amplitude.
pub fn multi_mode(grid: &Arc<Grid>, amplitude: f64, seed: u64, count: usize) -> InitialData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = InitialData::zero(grid);
    let mut added = 0;
    while added < count {
        let k1 = rng.gen_range(-2i64..=2);
        let k2 = rng.gen_range(-2i64..=2);
        if k1 == 0 && k2 == 0 {
            continue;
        }
        let a = amplitude * rng.gen_range(0.3..1.0) / count as f64;
        let phase = rng.gen_range(0.0..TWO_PI);
        let part = mode_with_phase(grid, a, k1, k2, phase);
        for i in 1..=3 {
            data.v0.comp_mut(i).add_assign(part.v0.comp(i));
        }
        data.w1.add_assign(&part.w1);
        added += 1;
    }
    data
}

/// Named generator registry used by the batch runner.
pub fn by_name(
    grid: &Arc<Grid>,
    name: &str,
    amplitude: f64,
    k1: i64,
    k2: i64,
    seed: u64,
    count: usize,
) -> Option<InitialData> {
    match name {
        "zero" => Some(InitialData::zero(grid)),
        "shear" => Some(shear(grid, amplitude)),
        "single_mode" => Some(single_mode(grid, amplitude, k1, k2)),
        "interior_mode" => Some(interior_mode(grid, amplitude, k1, k2)),
        "multi_mode" => Some(multi_mode(grid, amplitude, seed, count)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::validate::{validate_initial_data, VALIDATION_TOL};

    #[test]
    fn generated_data_pass_validation() {
        let g = Grid::new(16, 16, 17);
        for data in [
            single_mode(&g, 1e-3, 1, 0),
            single_mode(&g, 0.01, 2, -1),
            interior_mode(&g, 0.05, 1, 1),
            multi_mode(&g, 0.02, 11, 4),
            shear(&g, 0.3),
        ] {
            let report = validate_initial_data(&data.v0, &data.w1, Some(&data.w0), VALIDATION_TOL).unwrap();
            assert!(report.pass(), "{}", report.summary());
        }
    }
}
