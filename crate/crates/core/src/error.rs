//! Error type shared by all solver components.

use std::fmt;

/// Errors raised by geometry construction, elliptic solves, and the coupled
/// drivers. Variants carry the quantity that tripped the guard so callers can
/// log or report it.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    /// A per-mode profile evaluation would lose all precision or overflow.
    OverflowGuard { mode_scale: f64 },
    /// The vertical derivative of the extension dropped to or below zero;
    /// the change of variables is not invertible.
    DegenerateJacobian { min_j: f64 },
    /// Forcing handed to the plate carries a mean above the hard gate.
    MeanViolation { mean: f64 },
    /// A fixed-point solve ran out of iterations.
    NonConvergence { iterations: usize, residual: f64 },
    /// A pure Neumann problem whose data violate the solvability identity.
    CompatibilityViolation { residual: f64 },
    /// Transport data admit inflow through the channel walls.
    BoundaryInflow { residual: f64 },
    /// A reconstruction was requested without data pinning the constant
    /// horizontal flows.
    KernelUnderdetermined,
    /// A window iteration failed to shrink its difference metric.
    NoContraction { sweeps: usize, ratio: f64 },
    /// The geometry monitor left its configured band mid-run.
    GeometryAbort { min_j: f64, max_j: f64, a_dev: f64 },
    /// Initial data failed the admissibility checks.
    ValidationFailed { summary: String },
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::OverflowGuard { mode_scale } => {
                write!(f, "mode profile evaluation out of float range (scale {mode_scale:.3e})")
            }
            SolverError::DegenerateJacobian { min_j } => {
                write!(f, "degenerate map: min vertical derivative {min_j:.6e} <= 0")
            }
            SolverError::MeanViolation { mean } => {
                write!(f, "plate forcing mean {mean:.3e} exceeds tolerance")
            }
            SolverError::NonConvergence { iterations, residual } => {
                write!(f, "iteration failed to converge after {iterations} steps (residual {residual:.3e})")
            }
            SolverError::CompatibilityViolation { residual } => {
                write!(f, "Neumann data incompatible: residual {residual:.3e}")
            }
            SolverError::BoundaryInflow { residual } => {
                write!(f, "transport boundary is not characteristic: residual {residual:.3e}")
            }
            SolverError::KernelUnderdetermined => {
                write!(f, "mean horizontal flow required to pin the reconstruction kernel")
            }
            SolverError::NoContraction { sweeps, ratio } => {
                write!(f, "window iteration not contracting after {sweeps} sweeps (ratio {ratio:.3})")
            }
            SolverError::GeometryAbort { min_j, max_j, a_dev } => {
                write!(f, "geometry monitor tripped: J in [{min_j:.4}, {max_j:.4}], |a-I| = {a_dev:.4}")
            }
            SolverError::ValidationFailed { summary } => write!(f, "invalid initial data: {summary}"),
        }
    }
}

impl std::error::Error for SolverError {}

pub type Result<T> = std::result::Result<T, SolverError>;
