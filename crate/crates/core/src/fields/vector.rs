//! Three-component vector fields.

use super::grid::Grid;
use super::scalar::ScalarField3D;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct VectorField3D {
    pub components: [ScalarField3D; 3],
}

impl VectorField3D {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            components: [
                ScalarField3D::zeros(grid),
                ScalarField3D::zeros(grid),
                ScalarField3D::zeros(grid),
            ],
        }
    }

    pub fn new(v1: ScalarField3D, v2: ScalarField3D, v3: ScalarField3D) -> Self {
        Self { components: [v1, v2, v3] }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.components[0].grid
    }

    /// 1-based component access matching the coordinate labels.
    pub fn comp(&self, i: usize) -> &ScalarField3D {
        &self.components[i - 1]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField3D {
        &mut self.components[i - 1]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0f64, |acc, c| acc.max(c.max_abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.components.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for comp in &mut self.components {
            comp.scale(c);
        }
    }

    pub fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.axpy(c, b);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            components: [
                self.components[0].sub(&other.components[0]),
                self.components[1].sub(&other.components[1]),
                self.components[2].sub(&other.components[2]),
            ],
        }
    }

    pub fn dealias(&mut self) {
        for c in &mut self.components {
            c.dealias();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}
