//! Admissibility checks on initial data.

use crate::ale::{build_map, InterfaceState};
use crate::error::{Result, SolverError};
use crate::fields::scalar::{Boundary, ScalarField2D};
use crate::fields::vector::VectorField3D;
use crate::ops;

pub const VALIDATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
    pub tol: f64,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect()
    }

    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{}={:.3e}{}", c.name, c.residual, if c.pass { "" } else { " FAIL" }))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Check that `(v0, w1)` (with optional initial displacement `w0`) satisfy
/// the interface matching, bottom impermeability, incompressibility, and the
/// two zero-mean conditions. Report-only; callers decide whether to abort.
pub fn validate_initial_data(
    v0: &VectorField3D,
    w1: &ScalarField2D,
    w0: Option<&ScalarField2D>,
    tol: f64,
) -> Result<ValidationReport> {
    let grid = v0.grid().clone();
    let w0 = match w0 {
        Some(w) => w.clone(),
        None => ScalarField2D::zeros(&grid),
    };
    // the checker owns the admissibility verdict, so the state invariants
    // are not enforced here; only a non-invertible map aborts the report
    let state = InterfaceState::new_unchecked(w0, w1.clone(), 0.0);
    let map = build_map(&state)?;

    let mut checks = Vec::new();
    let mut push = |name: &'static str, residual: f64| {
        checks.push(ValidationCheck { name, residual, pass: residual <= tol });
    };

    let kin = {
        let mut d = ops::cofactor_normal_component(&map, v0).trace(Boundary::Gamma1);
        d.axpy(-1.0, w1);
        d.max_abs()
    };
    push("interface_velocity_match", kin);
    push("bottom_impermeability", v0.comp(3).trace(Boundary::Gamma0).max_abs());
    push("divergence_free", ops::ale_divergence(&map, v0).max_abs());
    push("interface_velocity_mean", w1.mean().abs());
    push("interface_flux_mean", v0.comp(3).trace(Boundary::Gamma1).mean().abs());

    Ok(ValidationReport { checks, tol })
}

/// Convert a failed report into the error the drivers raise.
pub fn require_valid(report: &ValidationReport) -> Result<()> {
    if report.pass() {
        Ok(())
    } else {
        Err(SolverError::ValidationFailed { summary: report.summary() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scalar::ScalarField3D;
    use crate::fields::spectral::TWO_PI;
    use crate::fields::Grid;

    #[test]
    fn zero_data_pass() {
        let g = Grid::new(16, 16, 17);
        let report =
            validate_initial_data(&VectorField3D::zeros(&g), &ScalarField2D::zeros(&g), None, VALIDATION_TOL)
                .unwrap();
        assert!(report.pass());
        assert!(report.checks.iter().all(|c| c.residual == 0.0));
    }

    #[test]
    fn shear_passes() {
        let g = Grid::new(16, 16, 17);
        let v = VectorField3D::new(
            ScalarField3D::from_fn(&g, |_, _, x3| x3 * (1.0 - 0.3 * x3)),
            ScalarField3D::zeros(&g),
            ScalarField3D::zeros(&g),
        );
        let report = validate_initial_data(&v, &ScalarField2D::zeros(&g), None, VALIDATION_TOL).unwrap();
        assert!(report.pass(), "{}", report.summary());
    }

    #[test]
    fn perturbed_interface_velocity_fails_the_matching_check() {
        let g = Grid::new(16, 16, 17);
        let data = crate::driver::generator::single_mode(&g, 0.01, 1, 0);
        let report = validate_initial_data(&data.v0, &data.w1, None, VALIDATION_TOL).unwrap();
        assert!(report.pass(), "{}", report.summary());

        let mut bad = data.w1.clone();
        bad.axpy(
            1.0,
            &ScalarField2D::from_fn(&g, |x1, _| 0.1 * (TWO_PI * x1).cos()),
        );
        let report = validate_initial_data(&data.v0, &bad, None, VALIDATION_TOL).unwrap();
        assert!(!report.pass());
        assert_eq!(report.failed_names(), vec!["interface_velocity_match"]);
        let r = report.checks[0].residual;
        assert!((r - 0.1).abs() <= 1e-12, "expected the planted defect, got {r}");
    }
}
