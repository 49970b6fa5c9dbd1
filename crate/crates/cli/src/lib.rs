//! Batch front end: configuration parsing, run orchestration, experiment
//! sweeps, and report emission.

pub mod commands;
pub mod config;
pub mod summary;

/// Process exit codes shared by all subcommands.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const GEOMETRY: i32 = 3;
    pub const NON_CONVERGENCE: i32 = 4;
}

use aep_core::SolverError;

/// Map solver errors onto the documented exit codes.
pub fn exit_code_for(err: &SolverError) -> i32 {
    match err {
        SolverError::ValidationFailed { .. } | SolverError::MeanViolation { .. } => exit_codes::VALIDATION,
        SolverError::GeometryAbort { .. } | SolverError::DegenerateJacobian { .. } => exit_codes::GEOMETRY,
        SolverError::NonConvergence { .. }
        | SolverError::NoContraction { .. }
        | SolverError::CompatibilityViolation { .. }
        | SolverError::BoundaryInflow { .. } => exit_codes::NON_CONVERGENCE,
        _ => exit_codes::USAGE,
    }
}
