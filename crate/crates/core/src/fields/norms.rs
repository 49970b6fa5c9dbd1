//! Sobolev-type diagnostic norms.
//!
//! Boundary fields use the exact Fourier multiplier `(1 + |2 pi k|^2)^(s/2)`.
//! Channel fields use an anisotropic surrogate: the horizontal multiplier of
//! order `s - m` is combined with `m` vertical collocation derivatives for
//! `m = 0 .. floor(s)`, summed in quadrature,
//!
//!   N(f)^2 = sum_m  || Lh^(s-m) d3^m f ||^2_{L2}.
//!
//! The surrogate is monotone in resolution and order but is not claimed to be
//! equivalent to a genuine fractional norm on the channel.

use super::grid::Grid;
use super::scalar::{ScalarField2D, ScalarField3D};
use super::spectral;

/// `|| (1 - Lap_h)^(s/2) f ||_{L2}` on the boundary torus.
pub fn sobolev_norm_2d(field: &ScalarField2D, s: f64) -> f64 {
    assert!(s.is_finite());
    let grid = &field.grid;
    let buf = field.spectrum();
    let scale = 1.0 / grid.horizontal_len() as f64;
    let mut total = 0.0;
    for (idx, v) in buf.iter().enumerate() {
        let mult = (1.0 + spectral::ksq(grid, idx)).powf(s);
        total += mult * (v * scale).norm_sqr();
    }
    total.sqrt()
}

/// Apply the horizontal multiplier of order `s` to a boundary field.
pub fn lambda_2d(field: &ScalarField2D, s: f64) -> ScalarField2D {
    field.apply_multiplier(|ks| (1.0 + ks).powf(s / 2.0))
}

/// Anisotropic surrogate norm for channel fields; see the module docs.
pub fn sobolev_norm_3d(field: &ScalarField3D, s: f64) -> f64 {
    assert!(s.is_finite() && s >= 0.0);
    let grid = &field.grid;
    let orders = s.floor() as usize;
    let mut total = 0.0;
    let mut current = field.clone();
    for m in 0..=orders {
        total += weighted_l2_sq(grid, &current, s - m as f64);
        if m < orders {
            current = current.diff(3);
        }
    }
    total.sqrt()
}

fn weighted_l2_sq(grid: &Grid, field: &ScalarField3D, order: f64) -> f64 {
    let spec = spectral::fwd3(grid, &field.data);
    let m = grid.horizontal_len();
    let scale = 1.0 / (m * m) as f64;
    let flat = spec.as_slice().expect("contiguous spectral buffer");
    let mut total = 0.0;
    for (i3, &w) in grid.weights.iter().enumerate() {
        let plane = &flat[i3 * m..(i3 + 1) * m];
        let mut level = 0.0;
        for (idx, v) in plane.iter().enumerate() {
            level += (1.0 + spectral::ksq(grid, idx)).powf(order) * v.norm_sqr();
        }
        total += w * level * scale;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::Grid;
    use crate::fields::spectral::TWO_PI;
    use approx::assert_relative_eq;

    #[test]
    fn constants_are_fixed_points_of_the_multiplier() {
        let g = Grid::new(16, 16, 9);
        let f = ScalarField2D::constant(&g, 1.0);
        assert_relative_eq!(sobolev_norm_2d(&f, 2.5), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn single_mode_norms_match_closed_forms() {
        let g = Grid::new(16, 16, 9);
        let f = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        assert_relative_eq!(sobolev_norm_2d(&f, 0.0), 0.5f64.sqrt(), max_relative = 1e-12);
        let expect = 0.5f64.sqrt() * (1.0 + 4.0 * std::f64::consts::PI.powi(2)).sqrt();
        assert_relative_eq!(sobolev_norm_2d(&f, 1.0), expect, max_relative = 1e-12);
    }

    #[test]
    fn surrogate_norm_reduces_to_l2_at_zero_order() {
        let g = Grid::new(16, 16, 13);
        assert_eq!(sobolev_norm_3d(&ScalarField3D::zeros(&g), 2.5), 0.0);
        let one = ScalarField3D::constant(&g, 1.0);
        assert_relative_eq!(sobolev_norm_3d(&one, 0.0), 1.0, max_relative = 1e-13);
        let f = ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).cos());
        assert_relative_eq!(sobolev_norm_3d(&f, 0.0), 0.5f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn multiplier_preserves_the_mean_at_any_order() {
        let g = Grid::new(16, 16, 9);
        let f = ScalarField2D::from_fn(&g, |x1, x2| {
            2.0 + (TWO_PI * x1).cos() - 0.4 * (TWO_PI * (x1 + 2.0 * x2)).sin()
        });
        for s in [0.0, 0.7, 2.0, 3.5] {
            let lf = lambda_2d(&f, s);
            assert_relative_eq!(lf.mean(), f.mean(), max_relative = 1e-12);
        }
    }
}
