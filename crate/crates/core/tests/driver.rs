//! Integration tests of the coupled drivers: conservation, recovery of the
//! side conditions, window iteration behavior, refinement order, and the
//! experiment modes.

use aep_core::ale::InterfaceState;
use aep_core::driver::{
    dt_sweep, energy_audit, generator, picard_window, run_coupled, solve_euler_given_coefficients,
    stepper, CoupledState, ExitReason, RunConfig, SolverMode, WPath,
};
use aep_core::euler::{ale_vorticity, div_curl_reconstruct, FluidState};
use aep_core::fields::scalar::ScalarField2D;
use aep_core::fields::spectral::TWO_PI;
use aep_core::fields::Grid;
use aep_core::SolverError;

fn small_cfg(dt: f64, t_end: f64, nu: f64) -> RunConfig {
    let mut cfg = RunConfig::new(16, 16, 17, dt, t_end, nu);
    cfg.cadence = 5;
    cfg
}

#[test]
fn rest_data_stay_at_rest() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(1e-3, 0.02, 0.0);
    let out = run_coupled(&cfg, &generator::InitialData::zero(&grid)).unwrap();
    assert_eq!(out.exit, ExitReason::Completed);
    assert!(out.final_state.fluid.v.max_abs() < 1e-15);
    assert!(out.final_state.interface.w.max_abs() < 1e-15);
    let audit = energy_audit(&out.records);
    assert_eq!(audit.max_drift_abs, 0.0);
}

#[test]
fn interface_volume_is_conserved() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(5e-4, 0.05, 0.0);
    let data = generator::multi_mode(&grid, 1e-3, 5, 3);
    let out = run_coupled(&cfg, &data).unwrap();
    let v0 = data.w0.mean();
    let v1 = out.final_state.interface.w.mean();
    assert!((v1 - v0).abs() <= 1e-10, "interface volume drifted by {:.3e}", v1 - v0);
}

#[test]
fn geometry_monitor_aborts_inadmissible_runs() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(1e-3, 0.02, 0.0);
    // admissible (invertible) but outside the Jacobian band from the start
    let mut data = generator::InitialData::zero(&grid);
    data.w0 = ScalarField2D::from_fn(&grid, |x1, _| 0.12 * (TWO_PI * x1).cos());
    let out = run_coupled(&cfg, &data).unwrap();
    assert!(matches!(out.exit, ExitReason::GeometryAbort { .. }));
    // completed runs never left the band
    let data = generator::single_mode(&grid, 1e-3, 1, 0);
    let out = run_coupled(&cfg, &data).unwrap();
    assert_eq!(out.exit, ExitReason::Completed);
    for r in &out.records {
        assert!(r.min_j >= 0.5 && r.max_j <= 1.5);
    }
}

#[test]
fn reconstruction_matches_the_evolved_velocity() {
    let grid = Grid::new(16, 16, 17);
    let mut cfg = small_cfg(5e-4, 0.01, 0.0);
    cfg.recon_check_every = 10;
    let data = generator::single_mode(&grid, 1e-3, 1, 0);
    let out = run_coupled(&cfg, &data).unwrap();
    assert!(out.recon_residual.unwrap() <= 1e-6);
    let state = &out.final_state;
    let zeta = ale_vorticity(&state.fluid.v, &state.map);
    let v = div_curl_reconstruct(
        &zeta,
        &state.interface.w_t,
        Some(state.fluid.mean_flow),
        &state.map,
        1e-10,
    )
    .unwrap();
    let err = v.sub(&state.fluid.v).max_abs();
    assert!(err <= 1e-6, "cross-solver reconstruction differs by {err:.3e}");
}

#[test]
fn per_step_energy_exchange_is_high_order() {
    let grid = Grid::new(16, 16, 17);
    let data = generator::single_mode(&grid, 1e-2, 1, 0);
    let defect = |dt: f64| {
        let cfg = small_cfg(dt, dt, 0.0);
        let out = run_coupled(&cfg, &data).unwrap();
        let a = energy_audit(&out.records);
        a.max_drift_abs
    };
    let d1 = defect(2e-3);
    let d2 = defect(1e-3);
    let order = (d1 / d2).log2();
    assert!(order >= 2.5, "per-step exchange defect {d1:.3e} -> {d2:.3e} (order {order:.2})");
}

#[test]
fn coupled_refinement_order_is_at_least_two() {
    let mut cfg = RunConfig::new(16, 16, 17, 1e-3, 0.02, 0.0);
    cfg.cadence = 100;
    let grid = Grid::new(16, 16, 17);
    let data = generator::single_mode(&grid, 1e-2, 1, 0);
    let report = dt_sweep(&cfg, &data, &[2e-3, 1e-3, 5e-4], 1.25e-4).unwrap();
    for (i, order) in report.orders.iter().enumerate() {
        assert!(*order >= 2.0, "order {order:.2} at refinement {i} (errors {:?})", report.errors);
    }
}

#[test]
fn frozen_flat_path_preserves_shear() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(1e-3, 0.02, 0.0);
    let data = generator::shear(&grid, 0.3);
    let path = WPath::frozen(
        &grid,
        &ScalarField2D::zeros(&grid),
        &ScalarField2D::zeros(&grid),
        0.0,
        cfg.dt,
        20,
    );
    let v0 = FluidState::new(data.v0.clone(), 0.0);
    let traj = solve_euler_given_coefficients(&path, &v0, &cfg).unwrap();
    assert!(traj.worst_divergence() <= 1e-9);
    let drift = traj.final_velocity().sub(&data.v0).max_abs();
    assert!(drift <= 1e-9, "shear drifted by {drift:.3e}");
}

#[test]
fn frozen_flat_path_keeps_interior_data_solenoidal() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(2.5e-4, 0.025, 0.0);
    let data = generator::interior_mode(&grid, 0.05, 1, 1);
    let path = WPath::frozen(
        &grid,
        &ScalarField2D::zeros(&grid),
        &ScalarField2D::zeros(&grid),
        0.0,
        cfg.dt,
        100,
    );
    let v0 = FluidState::new(data.v0.clone(), 0.0);
    let traj = solve_euler_given_coefficients(&path, &v0, &cfg).unwrap();
    assert!(traj.worst_divergence() <= 1e-7, "divergence {:.3e}", traj.worst_divergence());
    let (top, bottom) = traj.worst_defects();
    assert!(top <= 1e-7 && bottom <= 1e-7, "wall defects ({top:.3e}, {bottom:.3e})");
}

#[test]
fn oscillating_path_recovers_the_interface_condition() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(2.5e-4, 0.025, 0.0);
    let amp = 1e-3;
    let om = 4.0;
    // ramped oscillation: starts at rest so zero initial data are admissible
    let path = WPath::from_fn(
        0.0,
        cfg.dt,
        100,
        |t| ScalarField2D::from_fn(&grid, move |x1, _| amp * (1.0 - (om * t).cos()) * (TWO_PI * x1).cos()),
        |t| ScalarField2D::from_fn(&grid, move |x1, _| amp * om * (om * t).sin() * (TWO_PI * x1).cos()),
        |t| ScalarField2D::from_fn(&grid, move |x1, _| amp * om * om * (om * t).cos() * (TWO_PI * x1).cos()),
    );
    let v0 = FluidState::rest(&grid);
    let traj = solve_euler_given_coefficients(&path, &v0, &cfg).unwrap();
    let (top, bottom) = traj.worst_defects();
    assert!(top <= 1e-7, "interface defect {top:.3e}");
    assert!(bottom <= 1e-9, "bottom defect {bottom:.3e}");
    assert!(traj.worst_divergence() <= 1e-7);
}

#[test]
fn window_iteration_trivial_and_steady_cases() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(1e-3, 0.01, 0.1);

    let state = CoupledState::rest(&grid);
    let (next, report) = picard_window(&state, 0.01, 1e-16, 5, 0.1, &cfg).unwrap();
    assert_eq!(report.sweeps, 1);
    assert!(next.fluid.v.max_abs() < 1e-15);

    let data = generator::shear(&grid, 0.3);
    let state = CoupledState::new(FluidState::new(data.v0.clone(), 0.0), InterfaceState::rest(&grid)).unwrap();
    let (next, report) = picard_window(&state, 0.01, 1e-16, 5, 0.1, &cfg).unwrap();
    assert!(report.sweeps <= 2, "steady shear took {} sweeps", report.sweeps);
    assert!(next.fluid.v.sub(&data.v0).max_abs() <= 1e-9);
}

#[test]
fn window_iteration_rejects_undamped_plates() {
    let grid = Grid::new(16, 16, 17);
    let cfg = small_cfg(1e-3, 0.01, 0.0);
    let state = CoupledState::rest(&grid);
    match picard_window(&state, 0.01, 1e-16, 5, 0.0, &cfg) {
        Err(SolverError::ValidationFailed { .. }) => {}
        other => panic!("expected rejection of the undamped window, got {other:?}"),
    }
}

#[test]
fn picard_mode_tracks_the_coupled_stepper() {
    let grid = Grid::new(16, 16, 17);
    let data = generator::single_mode(&grid, 1e-3, 1, 0);
    let t_end = 0.02;
    let mut semi = small_cfg(5e-4, t_end, 0.1);
    semi.cadence = 100;
    let reference = run_coupled(&semi, &data).unwrap();
    let mut windowed = semi.clone();
    windowed.mode = SolverMode::PicardWindow;
    windowed.window = 5e-3;
    windowed.tolerances.picard = 1e-18;
    let alt = run_coupled(&windowed, &data).unwrap();
    assert_eq!(alt.exit, ExitReason::Completed);
    let gap = stepper::state_difference(&alt.final_state, &reference.final_state);
    // both integrate the same dynamics at second order; they agree to the
    // truncation scale (~dt^2 per unit time), four orders below the
    // solution scale of ~1e-3
    assert!(gap <= 2e-7, "window mode diverged from the coupled stepper by {gap:.3e}");
}

#[test]
fn vorticity_form_tracks_the_coupled_stepper() {
    let grid = Grid::new(16, 16, 17);
    let data = generator::single_mode(&grid, 1e-3, 1, 0);
    let mut semi = small_cfg(1e-3, 5e-3, 0.0);
    semi.cadence = 100;
    let reference = run_coupled(&semi, &data).unwrap();
    let mut vort = semi.clone();
    vort.mode = SolverMode::VorticityForm;
    vort.tolerances.divcurl = 1e-11;
    let alt = run_coupled(&vort, &data).unwrap();
    assert_eq!(alt.exit, ExitReason::Completed);
    let gap = stepper::state_difference(&alt.final_state, &reference.final_state);
    assert!(gap <= 5e-8, "vorticity form diverged from the coupled stepper by {gap:.3e}");
}
