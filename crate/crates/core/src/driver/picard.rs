//! Alternating window iteration.
//!
//! Over a short window the interface path is frozen, the fluid is solved
//! with given coefficients, and the plate is re-solved under the resulting
//! interface pressure; the loop repeats until the weighted difference metric
//! of consecutive sweeps contracts below tolerance. Positive damping is
//! required. The window metric is
//!
//!   alpha + w * beta,
//!
//! where `alpha` collects the squared plate differences (displacement,
//! velocity, acceleration) and `beta` the squared velocity difference, both
//! in sup-over-window L2 norms, and `w` is the configured pairing weight.

use super::config::RunConfig;
use super::given::{solve_euler_given_coefficients, unforced_plate_path, GivenCoeffTrajectory, WPath};
use super::state::CoupledState;
use crate::error::{Result, SolverError};
use crate::euler::FluidState;
use crate::fields::scalar::ScalarField2D;
use crate::plate::{plate_acceleration, plate_step, PlateForcing};
use crate::pressure::PressureField;

#[derive(Debug, Clone, Default)]
pub struct PicardReport {
    /// Metric value after each sweep.
    pub metrics: Vec<f64>,
    /// Consecutive metric ratios.
    pub ratios: Vec<f64>,
    pub sweeps: usize,
    pub final_compat_residual: f64,
}

/// Advance one window by alternating fluid and plate solves.
pub fn picard_window(
    state: &CoupledState,
    window: f64,
    tol: f64,
    max_sweeps: usize,
    nu: f64,
    cfg: &RunConfig,
) -> Result<(CoupledState, PicardReport)> {
    if nu <= 0.0 {
        return Err(SolverError::ValidationFailed {
            summary: "the window iteration requires positive plate damping".into(),
        });
    }
    let steps = (window / cfg.dt).round().max(1.0) as usize;
    let dt = window / steps as f64;

    // initial path: unforced plate flow from the window-start state
    let mut path = unforced_plate_path(&state.interface, nu, dt, steps)?;
    let mut prev_v: Option<Vec<_>> = None;
    let mut report = PicardReport::default();
    let mut best: Option<(GivenCoeffTrajectory, WPath)> = None;

    for sweep in 1..=max_sweeps {
        let traj = solve_euler_given_coefficients(&path, &state.fluid, cfg)?;
        let new_path = plate_window_solve(&state.interface, &traj, nu, dt, steps)?;

        // plate metric: sup over full-step samples of the squared L2 diffs
        let mut alpha = 0.0f64;
        for i in (0..path.len()).step_by(2) {
            let dw = new_path.w[i].sub(&path.w[i]).l2_norm();
            let dwt = new_path.w_t[i].sub(&path.w_t[i]).l2_norm();
            let dwtt = new_path.w_tt[i].sub(&path.w_tt[i]).l2_norm();
            alpha = alpha.max(dw * dw + dwt * dwt + dwtt * dwtt);
        }
        // velocity metric against the previous sweep's trajectory
        let beta = match &prev_v {
            None => traj.v.iter().map(|v| v.l2_norm().powi(2)).fold(0.0f64, f64::max),
            Some(prev) => traj
                .v
                .iter()
                .zip(prev.iter())
                .map(|(a, b)| a.sub(b).l2_norm().powi(2))
                .fold(0.0f64, f64::max),
        };
        let metric = alpha + cfg.tolerances.picard_weight * beta;
        if let Some(last) = report.metrics.last() {
            report.ratios.push(metric / last.max(1e-300));
        }
        report.metrics.push(metric);
        report.sweeps = sweep;
        report.final_compat_residual = traj.records.last().map(|r| r.compat).unwrap_or(0.0);
        log::debug!("window sweep {sweep}: metric {metric:.3e}");

        prev_v = Some(traj.v.clone());
        path = new_path.clone();
        best = Some((traj, new_path));
        if metric <= tol {
            break;
        }
        if sweep == max_sweeps {
            let ratio = *report.ratios.last().unwrap_or(&f64::NAN);
            if !(ratio < 1.0) {
                return Err(SolverError::NoContraction { sweeps: sweep, ratio });
            }
        }
    }

    let (traj, final_path) = best.expect("at least one sweep ran");
    let end_t = state.t() + window;
    let fluid = FluidState::new(traj.final_velocity().clone(), end_t);
    let last = final_path.len() - 1;
    let interface = crate::ale::InterfaceState::new_unchecked(
        final_path.w[last].clone(),
        final_path.w_t[last].clone(),
        end_t,
    );
    let q_last = traj.q_traces.last().map(|t2| lift_trace(state, t2));
    let next = state.advanced(fluid, interface, q_last, Some(final_path.w_tt[last].clone()))?;
    Ok((next, report))
}

/// Re-solve the plate over the window under the recorded interface pressure
/// (held at the midpoint sample of each substep), returning the new path.
fn plate_window_solve(
    start: &crate::ale::InterfaceState,
    traj: &GivenCoeffTrajectory,
    nu: f64,
    dt: f64,
    steps: usize,
) -> Result<WPath> {
    let mut w = Vec::with_capacity(2 * steps + 1);
    let mut w_t = Vec::with_capacity(2 * steps + 1);
    let mut w_tt = Vec::with_capacity(2 * steps + 1);
    let mut current = start.clone();

    let forcing_at = |half_index: usize| -> PlateForcing {
        let mut trace = traj.q_traces[half_index.min(traj.q_traces.len() - 1)].clone();
        trace.project_zero_mean();
        PlateForcing::new(trace)
    };

    let record = |itf: &crate::ale::InterfaceState,
                  f: &PlateForcing,
                  w: &mut Vec<ScalarField2D>,
                  w_t: &mut Vec<ScalarField2D>,
                  w_tt: &mut Vec<ScalarField2D>| {
        w.push(itf.w.clone());
        w_t.push(itf.w_t.clone());
        w_tt.push(plate_acceleration(itf, f, nu));
    };

    record(&current, &forcing_at(0), &mut w, &mut w_t, &mut w_tt);
    for step in 0..steps {
        // hold the midpoint pressure over the substep
        let f = forcing_at(2 * step + 1);
        let half = plate_step(&current, &f, nu, 0.5 * dt)?;
        record(&half, &f, &mut w, &mut w_t, &mut w_tt);
        current = plate_step(&half, &f, nu, 0.5 * dt)?;
        record(&current, &f, &mut w, &mut w_t, &mut w_tt);
    }
    Ok(WPath { t0: start.t, half_dt: 0.5 * dt, w, w_t, w_tt })
}

/// Lift an interface trace to a constant-in-depth channel field so it can be
/// cached as a warm start.
fn lift_trace(state: &CoupledState, trace: &ScalarField2D) -> PressureField {
    let grid = state.grid();
    let mut q = crate::fields::scalar::ScalarField3D::zeros(grid);
    for i3 in 0..grid.n3 {
        for i2 in 0..grid.n2 {
            for i1 in 0..grid.n1 {
                q.data[[i3, i2, i1]] = trace.data[[i2, i1]];
            }
        }
    }
    PressureField { q }
}
