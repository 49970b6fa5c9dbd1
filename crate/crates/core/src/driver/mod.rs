//! Coupled drivers: initial-data validation and generation, the coupled
//! steppers, the given-coefficient fluid solve, the alternating window
//! iteration, parameter sweeps, and energy auditing.

pub mod audit;
pub mod config;
pub mod diag;
pub mod generator;
pub mod given;
pub mod picard;
pub mod state;
pub mod stepper;
pub mod sweep;
pub mod validate;

pub use audit::{energy_audit, AuditReport};
pub use config::{NormOrders, RunConfig, SolverMode, Tolerances};
pub use diag::{DiagnosticsRecord, CSV_HEADER};
pub use generator::InitialData;
pub use given::{solve_euler_given_coefficients, GivenCoeffTrajectory, WPath};
pub use picard::{picard_window, PicardReport};
pub use state::CoupledState;
pub use stepper::{run_coupled, run_coupled_on, ExitReason, RunOutcome, SemiImplicitStepper, VorticityFormStepper};
pub use sweep::{dt_sweep, nu_sweep, resolution_sweep};
pub use validate::{validate_initial_data, ValidationReport};
