//! Scalar fields on the channel and on its horizontal boundaries.

use super::grid::Grid;
use super::spectral;
use ndarray::{Array2, Array3, Zip};
use rustfft::num_complex::Complex64;
use std::sync::Arc;

/// Which horizontal wall a trace or boundary datum refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Fixed bottom wall at x3 = 0.
    Gamma0,
    /// Moving interface reference position x3 = 1.
    Gamma1,
}

/// Real scalar samples at every grid node, stored `(x3, x2, x1)`.
#[derive(Debug, Clone)]
pub struct ScalarField3D {
    pub grid: Arc<Grid>,
    pub data: Array3<f64>,
}

impl ScalarField3D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), data: Array3::zeros((grid.n3, grid.n2, grid.n1)) }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self { grid: grid.clone(), data: Array3::from_elem((grid.n3, grid.n2, grid.n1), c) }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut data = Array3::zeros((grid.n3, grid.n2, grid.n1));
        for i3 in 0..grid.n3 {
            let x3 = grid.x3[i3];
            for i2 in 0..grid.n2 {
                let x2 = grid.x2(i2);
                for i1 in 0..grid.n1 {
                    data[[i3, i2, i1]] = f(grid.x1(i1), x2, x3);
                }
            }
        }
        Self { grid: grid.clone(), data }
    }

    /// Partial derivative along axis 1, 2 (Fourier) or 3 (collocation).
    pub fn diff(&self, axis: usize) -> Self {
        match axis {
            1 | 2 => {
                let mut spec = spectral::fwd3(&self.grid, &self.data);
                spectral::apply_deriv(&self.grid, &mut spec, axis);
                Self { grid: self.grid.clone(), data: spectral::inv3(&self.grid, &spec) }
            }
            3 => Self { grid: self.grid.clone(), data: spectral::deriv_x3(&self.grid, &self.data) },
            _ => panic!("axis must be 1, 2 or 3"),
        }
    }

    /// Both horizontal derivatives from a single forward transform.
    pub fn grad_h(&self) -> (Self, Self) {
        let spec = spectral::fwd3(&self.grid, &self.data);
        let mut s1 = spec.clone();
        spectral::apply_deriv(&self.grid, &mut s1, 1);
        let mut s2 = spec;
        spectral::apply_deriv(&self.grid, &mut s2, 2);
        (
            Self { grid: self.grid.clone(), data: spectral::inv3(&self.grid, &s1) },
            Self { grid: self.grid.clone(), data: spectral::inv3(&self.grid, &s2) },
        )
    }

    pub fn trace(&self, boundary: Boundary) -> ScalarField2D {
        let i3 = match boundary {
            Boundary::Gamma0 => 0,
            Boundary::Gamma1 => self.grid.n3 - 1,
        };
        ScalarField2D { grid: self.grid.clone(), data: self.data.index_axis(ndarray::Axis(0), i3).to_owned() }
    }

    /// Volume integral: exact horizontal mean times the vertical quadrature.
    pub fn integrate(&self) -> f64 {
        let m = self.grid.horizontal_len() as f64;
        let mut total = 0.0;
        for (i3, &w) in self.grid.weights.iter().enumerate() {
            let plane_sum: f64 = self.data.index_axis(ndarray::Axis(0), i3).iter().sum();
            total += w * plane_sum / m;
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// L2(Omega) norm via plane Parseval sums and vertical quadrature.
    pub fn l2_norm(&self) -> f64 {
        let m = self.grid.horizontal_len() as f64;
        let mut total = 0.0;
        for (i3, &w) in self.grid.weights.iter().enumerate() {
            let plane_sq: f64 = self.data.index_axis(ndarray::Axis(0), i3).iter().map(|v| v * v).sum();
            total += w * plane_sq / m;
        }
        total.max(0.0).sqrt()
    }

    /// Remove horizontal modes beyond the 2/3-rule band.
    pub fn dealias(&mut self) {
        let mut spec = spectral::fwd3(&self.grid, &self.data);
        spectral::apply_dealias(&self.grid, &mut spec);
        self.data = spectral::inv3(&self.grid, &spec);
    }

    pub fn dealiased(mut self) -> Self {
        self.dealias();
        self
    }

    pub fn scale(&mut self, c: f64) {
        self.data.mapv_inplace(|v| c * v);
    }

    pub fn add_assign(&mut self, other: &Self) {
        Zip::from(&mut self.data).and(&other.data).for_each(|a, &b| *a += b);
    }

    pub fn axpy(&mut self, c: f64, other: &Self) {
        Zip::from(&mut self.data).and(&other.data).for_each(|a, &b| *a += c * b);
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        Zip::from(&mut out.data).and(&other.data).for_each(|a, &b| *a -= b);
        out
    }

    /// Pointwise product, no truncation.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        Zip::from(&mut out.data).and(&other.data).for_each(|a, &b| *a *= b);
        out
    }

    /// Pointwise product followed by the 2/3-rule truncation.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        self.mul(other).dealiased()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), data: self.data.mapv(|v| f(v)) }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Real scalar samples on a horizontal boundary, stored `(x2, x1)`.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    pub grid: Arc<Grid>,
    pub data: Array2<f64>,
}

impl ScalarField2D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), data: Array2::zeros((grid.n2, grid.n1)) }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self { grid: grid.clone(), data: Array2::from_elem((grid.n2, grid.n1), c) }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Array2::zeros((grid.n2, grid.n1));
        for i2 in 0..grid.n2 {
            for i1 in 0..grid.n1 {
                data[[i2, i1]] = f(grid.x1(i1), grid.x2(i2));
            }
        }
        Self { grid: grid.clone(), data }
    }

    /// Area average, i.e. the zeroth Fourier coefficient.
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.grid.horizontal_len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.grid.horizontal_len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    pub fn diff(&self, axis: usize) -> Self {
        assert!(axis == 1 || axis == 2, "boundary fields have horizontal derivatives only");
        let mut buf = spectral::fwd2(&self.grid, &self.data);
        spectral::apply_deriv_plane(&self.grid, &mut buf, axis);
        Self { grid: self.grid.clone(), data: spectral::inv2(&self.grid, &mut buf) }
    }

    /// Apply a Fourier multiplier given as a function of |2 pi k|^2.
    pub fn apply_multiplier(&self, sym: impl Fn(f64) -> f64) -> Self {
        let mut buf = spectral::fwd2(&self.grid, &self.data);
        for (idx, v) in buf.iter_mut().enumerate() {
            *v *= sym(spectral::ksq(&self.grid, idx));
        }
        Self { grid: self.grid.clone(), data: spectral::inv2(&self.grid, &mut buf) }
    }

    /// Horizontal Laplacian.
    pub fn laplacian(&self) -> Self {
        self.apply_multiplier(|ks| -ks)
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        spectral::fwd2(&self.grid, &self.data)
    }

    pub fn from_spectrum(grid: &Arc<Grid>, mut buf: Vec<Complex64>) -> Self {
        Self { grid: grid.clone(), data: spectral::inv2(grid, &mut buf) }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.mapv_inplace(|v| c * v);
    }

    pub fn add_assign(&mut self, other: &Self) {
        Zip::from(&mut self.data).and(&other.data).for_each(|a, &b| *a += b);
    }

    pub fn axpy(&mut self, c: f64, other: &Self) {
        Zip::from(&mut self.data).and(&other.data).for_each(|a, &b| *a += c * b);
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        Zip::from(&mut out.data).and(&other.data).for_each(|a, &b| *a -= b);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        Zip::from(&mut out.data).and(&other.data).for_each(|a, &b| *a *= b);
        out
    }

    /// Pointwise product with 2/3-rule truncation.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        let out = self.mul(other);
        let mut buf = spectral::fwd2(&out.grid, &out.data);
        spectral::apply_dealias_plane(&out.grid, &mut buf);
        Self { grid: out.grid, data: spectral::inv2(&self.grid, &mut buf) }
    }

    /// Subtract the mean; returns the removed value.
    pub fn project_zero_mean(&mut self) -> f64 {
        let m = self.mean();
        self.data.mapv_inplace(|v| v - m);
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::spectral::TWO_PI;

    fn grid() -> Arc<Grid> {
        Grid::new(16, 16, 13)
    }

    #[test]
    fn diff_of_single_mode_is_exact() {
        let g = grid();
        let f = ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).cos());
        let d = f.diff(1);
        let exact = ScalarField3D::from_fn(&g, |x1, _, _| -TWO_PI * (TWO_PI * x1).sin());
        assert!(d.sub(&exact).max_abs() <= 1e-12 * TWO_PI);
    }

    #[test]
    fn diff_of_constant_along_x3_vanishes() {
        let g = grid();
        let f = ScalarField3D::constant(&g, 4.2);
        assert!(f.diff(3).max_abs() < 1e-12);
    }

    #[test]
    fn diff_x3_matches_polynomial_derivative() {
        let g = grid();
        let f = ScalarField3D::from_fn(&g, |_, _, x3| x3 * x3);
        let d = f.diff(3);
        let exact = ScalarField3D::from_fn(&g, |_, _, x3| 2.0 * x3);
        assert!(d.sub(&exact).max_abs() <= 1e-12);
    }

    #[test]
    fn traces_pick_the_walls() {
        let g = grid();
        let f = ScalarField3D::from_fn(&g, |x1, _, x3| (TWO_PI * x1).cos() * x3);
        let top = f.trace(Boundary::Gamma1);
        let bottom = f.trace(Boundary::Gamma0);
        assert!(bottom.max_abs() < 1e-15);
        let expect = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        assert!(top.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn mean_examples() {
        let g = grid();
        assert!((ScalarField2D::constant(&g, 3.5).mean() - 3.5).abs() < 1e-15);
        let c = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        assert!(c.mean().abs() <= 1e-14);
        let f = ScalarField2D::from_fn(&g, |_, x2| 1.0 + 0.2 * (TWO_PI * x2).cos());
        assert!((f.mean() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn integrate_examples() {
        let g = grid();
        assert!((ScalarField3D::constant(&g, 1.0).integrate() - 1.0).abs() < 1e-14);
        let f = ScalarField3D::from_fn(&g, |_, _, x3| x3);
        assert!((f.integrate() - 0.5).abs() <= 1e-12);
        let c = ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).cos());
        assert!(c.integrate().abs() <= 1e-14);
    }

    #[test]
    fn integrate_is_linear_and_positive() {
        let g = grid();
        let f = ScalarField3D::from_fn(&g, |x1, x2, x3| 1.0 + 0.3 * (TWO_PI * x1).cos() * x3 + 0.1 * (TWO_PI * x2).sin());
        let h = ScalarField3D::from_fn(&g, |_, _, x3| x3 * x3);
        let mut combo = f.clone();
        combo.axpy(2.5, &h);
        assert!((combo.integrate() - (f.integrate() + 2.5 * h.integrate())).abs() < 1e-13);
        let pos = ScalarField3D::from_fn(&g, |x1, _, _| 1.0 + 0.9 * (TWO_PI * x1).sin());
        assert!(pos.integrate() > 0.0);
    }

    #[test]
    fn mixed_derivatives_commute_on_resolved_data() {
        let g = grid();
        let f = ScalarField3D::from_fn(&g, |x1, _, x3| (TWO_PI * x1).cos() * (x3 * x3 * x3 - x3));
        let d13 = f.diff(1).diff(3);
        let d31 = f.diff(3).diff(1);
        assert!(d13.sub(&d31).max_abs() <= 1e-10);
    }
}
