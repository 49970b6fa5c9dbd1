//! Coupled time steppers.
//!
//! The default stepper advances the velocity with a four-stage explicit
//! scheme; at every stage the pressure solves the Robin problem whose
//! interface datum carries the plate load, so the plate acceleration is
//! implicit in the pressure and the stiff coupling cancels discretely. The
//! plate itself advances with its exact per-mode integrator, synchronized to
//! the stage times and driven by the stage pressure traces.
//!
//! The vorticity-form stepper transports the map-weighted vorticity instead
//! and reconstructs the velocity at every stage.

use super::config::{RunConfig, SolverMode};
use super::diag::DiagnosticsRecord;
use super::generator::InitialData;
use super::state::CoupledState;
use super::validate::{require_valid, validate_initial_data, VALIDATION_TOL};
use crate::ale::{build_map, monitor_geometry, AleMap, InterfaceState};
use crate::error::{Result, SolverError};
use crate::euler::{ale_vorticity, divergence_residual, momentum_rhs, vorticity_rhs, DivCurlSolver, FluidState, VorticityState};
use crate::fields::scalar::{Boundary, ScalarField2D};
use crate::fields::spectral;
use crate::fields::vector::VectorField3D;
use crate::fields::Grid;
use crate::ops;
use crate::plate::{plate_acceleration, plate_step, PlateForcing};
use crate::pressure::{assemble_robin_problem, BcKind, EllipticSolver, PressureField, RhsForm};
use std::sync::Arc;

/// Bookkeeping of one step.
#[derive(Debug, Clone, Default)]
pub struct StepInfo {
    pub elliptic_iterations: usize,
    pub projection_size: Option<f64>,
}

pub struct SemiImplicitStepper {
    grid: Arc<Grid>,
    robin: EllipticSolver,
    neumann: EllipticSolver,
}

impl SemiImplicitStepper {
    pub fn new(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            robin: EllipticSolver::new(grid, BcKind::Robin),
            neumann: EllipticSolver::new(grid, BcKind::Neumann),
        }
    }

    fn stage(
        &self,
        v: &VectorField3D,
        interface: &InterfaceState,
        map: &AleMap,
        nu: f64,
        cfg: &RunConfig,
        warm: Option<&PressureField>,
    ) -> Result<(VectorField3D, PressureField, usize)> {
        let problem = assemble_robin_problem(v, map, interface, nu, RhsForm::Simplified);
        let (q, stats) = self.robin.solve(
            &problem,
            cfg.tolerances.elliptic,
            cfg.tolerances.elliptic_max_iter,
            warm,
        )?;
        let k = momentum_rhs(v, &q, map)?;
        Ok((k, q, stats.iterations))
    }

    /// Advance the coupled state by one step.
    pub fn step(&self, state: &CoupledState, cfg: &RunConfig) -> Result<(CoupledState, StepInfo)> {
        let dt = cfg.dt;
        let nu = cfg.nu;
        let report = monitor_geometry(&state.map, &cfg.thresholds);
        if !report.ok() {
            return Err(SolverError::GeometryAbort {
                min_j: report.min_j,
                max_j: report.max_j,
                a_dev: report.a_dev,
            });
        }

        let mut info = StepInfo::default();
        let forcing_of = |q: &PressureField| {
            let mut trace = q.interface_trace();
            let dropped = trace.project_zero_mean();
            if dropped.abs() > 1e-10 {
                log::debug!("interface pressure mean {dropped:.3e} projected before plate forcing");
            }
            PlateForcing::new(trace)
        };

        // stage 1 at t
        let (k1, q1, it1) = self.stage(
            &state.fluid.v,
            &state.interface,
            &state.map,
            nu,
            cfg,
            state.q_last.as_ref(),
        )?;
        let itf_half_1 = plate_step(&state.interface, &forcing_of(&q1), nu, 0.5 * dt)?;
        let map_half_1 = build_map(&itf_half_1)?;

        // stage 2 at t + dt/2
        let mut v2 = state.fluid.v.clone();
        v2.axpy(0.5 * dt, &k1);
        let (k2, q2, it2) = self.stage(&v2, &itf_half_1, &map_half_1, nu, cfg, Some(&q1))?;
        let itf_half_2 = plate_step(&state.interface, &forcing_of(&q2), nu, 0.5 * dt)?;
        let map_half_2 = build_map(&itf_half_2)?;

        // stage 3 at t + dt/2
        let mut v3 = state.fluid.v.clone();
        v3.axpy(0.5 * dt, &k2);
        let (k3, q3, it3) = self.stage(&v3, &itf_half_2, &map_half_2, nu, cfg, Some(&q2))?;
        let itf_full = plate_step(&state.interface, &forcing_of(&q3), nu, dt)?;
        let map_full = build_map(&itf_full)?;

        // stage 4 at t + dt
        let mut v4 = state.fluid.v.clone();
        v4.axpy(dt, &k3);
        let (k4, q4, it4) = self.stage(&v4, &itf_full, &map_full, nu, cfg, Some(&q3))?;
        info.elliptic_iterations = it1 + it2 + it3 + it4;

        // combine velocity stages
        let mut v_new = state.fluid.v.clone();
        v_new.axpy(dt / 6.0, &k1);
        v_new.axpy(dt / 3.0, &k2);
        v_new.axpy(dt / 3.0, &k3);
        v_new.axpy(dt / 6.0, &k4);
        v_new.dealias();

        // plate advance under the stage-averaged load
        let mut qbar = q1.interface_trace();
        qbar.axpy(2.0, &q2.interface_trace());
        qbar.axpy(2.0, &q3.interface_trace());
        qbar.axpy(1.0, &q4.interface_trace());
        qbar.scale(1.0 / 6.0);
        let dropped = qbar.project_zero_mean();
        if dropped.abs() > 1e-10 {
            log::debug!("averaged interface pressure mean {dropped:.3e} projected");
        }
        let interface_new = plate_step(&state.interface, &PlateForcing::new(qbar.clone()), nu, dt)?;
        let map_new = build_map(&interface_new)?;

        // defensive divergence projection, logged, off unless the residual
        // exceeds ten times the monitored tolerance
        let resid = divergence_residual(&v_new, &map_new);
        if resid > 10.0 * cfg.tolerances.divergence {
            let size = self.project_divergence(&mut v_new, &map_new);
            info.projection_size = Some(size);
            log::warn!(
                "divergence residual {resid:.3e} exceeded the gate; projection of size {size:.3e} applied"
            );
        }

        // acceleration recovered from the plate equation with the final load
        let w_tt = plate_acceleration(&interface_new, &PlateForcing::new(q4.interface_trace()), nu);

        let fluid = FluidState::new(v_new, state.fluid.t + dt);
        let next = CoupledState {
            fluid,
            interface: interface_new,
            map: map_new,
            q_last: Some(q4),
            w_tt_last: Some(w_tt),
        };
        Ok((next, info))
    }

    /// Remove the bulk of the variable divergence with a flat potential that
    /// keeps both wall fluxes intact. Returns the correction size.
    fn project_divergence(&self, v: &mut VectorField3D, map: &AleMap) -> f64 {
        let grid = &self.grid;
        let mut rhs = ops::ale_divergence(map, v);
        let mean = rhs.integrate();
        rhs.data.mapv_inplace(|x| x - mean);
        let spec = spectral::fwd3(grid, &rhs.data);
        let zero = ScalarField2D::zeros(grid);
        let phi = self.neumann.poisson(&spec, &zero, &zero);
        let (p1, p2) = phi.grad_h();
        let p3 = phi.diff(3);
        let size = p1.max_abs().max(p2.max_abs()).max(p3.max_abs());
        v.comp_mut(1).axpy(-1.0, &p1);
        v.comp_mut(2).axpy(-1.0, &p2);
        v.comp_mut(3).axpy(-1.0, &p3);
        size
    }
}

pub struct VorticityFormStepper {
    robin: EllipticSolver,
    divcurl: DivCurlSolver,
}

impl VorticityFormStepper {
    pub fn new(grid: &Arc<Grid>) -> Self {
        Self { robin: EllipticSolver::new(grid, BcKind::Robin), divcurl: DivCurlSolver::new(grid) }
    }

    /// One step of the transported-vorticity form: every stage reconstructs
    /// the velocity from the vorticity, the interface velocity, and the mean
    /// flows, then proceeds as in the coupled stepper.
    pub fn step(&self, state: &CoupledState, cfg: &RunConfig) -> Result<(CoupledState, StepInfo)> {
        let dt = cfg.dt;
        let nu = cfg.nu;
        let report = monitor_geometry(&state.map, &cfg.thresholds);
        if !report.ok() {
            return Err(SolverError::GeometryAbort {
                min_j: report.min_j,
                max_j: report.max_j,
                a_dev: report.a_dev,
            });
        }
        let zeta0 = ale_vorticity(&state.fluid.v, &state.map);
        let mean0 = state.fluid.mean_flow;

        let stage = |zeta: &VorticityState,
                     mean: [f64; 2],
                     interface: &InterfaceState,
                     map: &AleMap,
                     v_warm: Option<&VectorField3D>,
                     q_warm: Option<&PressureField>|
         -> Result<(VectorField3D, [f64; 2], VectorField3D, PressureField)> {
            let v = self.divcurl.reconstruct(
                zeta,
                &interface.w_t,
                Some(mean),
                map,
                cfg.tolerances.divcurl,
                cfg.tolerances.divcurl_max_iter,
                v_warm,
            )?;
            let problem = assemble_robin_problem(&v, map, interface, nu, RhsForm::Simplified);
            let (q, _) = self.robin.solve(
                &problem,
                cfg.tolerances.elliptic,
                cfg.tolerances.elliptic_max_iter,
                q_warm,
            )?;
            let dv = momentum_rhs(&v, &q, map)?;
            let dmean = [dv.comp(1).integrate(), dv.comp(2).integrate()];
            let dz = vorticity_rhs(zeta, &v, map, cfg.tolerances.boundary)?;
            Ok((dz, dmean, v, q))
        };

        let forcing_of = |q: &PressureField| {
            let mut trace = q.interface_trace();
            trace.project_zero_mean();
            PlateForcing::new(trace)
        };

        let (dz1, dm1, v_s1, q1) =
            stage(&zeta0, mean0, &state.interface, &state.map, Some(&state.fluid.v), state.q_last.as_ref())?;
        let itf_b = plate_step(&state.interface, &forcing_of(&q1), nu, 0.5 * dt)?;
        let map_b = build_map(&itf_b)?;

        let mut z2 = zeta0.zeta.clone();
        z2.axpy(0.5 * dt, &dz1);
        let m2 = [mean0[0] + 0.5 * dt * dm1[0], mean0[1] + 0.5 * dt * dm1[1]];
        let (dz2, dm2, v_s2, q2) =
            stage(&VorticityState { zeta: z2 }, m2, &itf_b, &map_b, Some(&v_s1), Some(&q1))?;
        let itf_c = plate_step(&state.interface, &forcing_of(&q2), nu, 0.5 * dt)?;
        let map_c = build_map(&itf_c)?;

        let mut z3 = zeta0.zeta.clone();
        z3.axpy(0.5 * dt, &dz2);
        let m3 = [mean0[0] + 0.5 * dt * dm2[0], mean0[1] + 0.5 * dt * dm2[1]];
        let (dz3, dm3, v_s3, q3) =
            stage(&VorticityState { zeta: z3 }, m3, &itf_c, &map_c, Some(&v_s2), Some(&q2))?;
        let itf_d = plate_step(&state.interface, &forcing_of(&q3), nu, dt)?;
        let map_d = build_map(&itf_d)?;

        let mut z4 = zeta0.zeta.clone();
        z4.axpy(dt, &dz3);
        let m4 = [mean0[0] + dt * dm3[0], mean0[1] + dt * dm3[1]];
        let (dz4, dm4, v_s4, q4) =
            stage(&VorticityState { zeta: z4 }, m4, &itf_d, &map_d, Some(&v_s3), Some(&q3))?;
        let _ = v_s4;

        let mut z_new = zeta0.zeta.clone();
        z_new.axpy(dt / 6.0, &dz1);
        z_new.axpy(dt / 3.0, &dz2);
        z_new.axpy(dt / 3.0, &dz3);
        z_new.axpy(dt / 6.0, &dz4);
        let mean_new = [
            mean0[0] + dt / 6.0 * (dm1[0] + 2.0 * dm2[0] + 2.0 * dm3[0] + dm4[0]),
            mean0[1] + dt / 6.0 * (dm1[1] + 2.0 * dm2[1] + 2.0 * dm3[1] + dm4[1]),
        ];

        let mut qbar = q1.interface_trace();
        qbar.axpy(2.0, &q2.interface_trace());
        qbar.axpy(2.0, &q3.interface_trace());
        qbar.axpy(1.0, &q4.interface_trace());
        qbar.scale(1.0 / 6.0);
        qbar.project_zero_mean();
        let interface_new = plate_step(&state.interface, &PlateForcing::new(qbar), nu, dt)?;
        let map_new = build_map(&interface_new)?;

        let v_new = self.divcurl.reconstruct(
            &VorticityState { zeta: z_new },
            &interface_new.w_t,
            Some(mean_new),
            &map_new,
            cfg.tolerances.divcurl,
            cfg.tolerances.divcurl_max_iter,
            Some(&v_s3),
        )?;
        let w_tt = plate_acceleration(&interface_new, &PlateForcing::new(q4.interface_trace()), nu);
        let mut fluid = FluidState::new(v_new, state.fluid.t + dt);
        fluid.mean_flow = mean_new;
        let next = CoupledState {
            fluid,
            interface: interface_new,
            map: map_new,
            q_last: Some(q4),
            w_tt_last: Some(w_tt),
        };
        Ok((next, StepInfo::default()))
    }
}

/// Reason a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum ExitReason {
    Completed,
    GeometryAbort { at: f64 },
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: CoupledState,
    pub exit: ExitReason,
    pub projections: usize,
    pub validation: super::validate::ValidationReport,
    /// Worst cross-solver reconstruction residual, when the check was on.
    pub recon_residual: Option<f64>,
}

/// Run the coupled solver from generated initial data.
pub fn run_coupled(cfg: &RunConfig, initial: &InitialData) -> Result<RunOutcome> {
    let grid = Grid::new(cfg.n1, cfg.n2, cfg.n3);
    run_coupled_on(cfg, &grid, initial)
}

/// Run the coupled solver on an existing grid.
pub fn run_coupled_on(cfg: &RunConfig, grid: &Arc<Grid>, initial: &InitialData) -> Result<RunOutcome> {
    let validation = validate_initial_data(&initial.v0, &initial.w1, Some(&initial.w0), VALIDATION_TOL)?;
    require_valid(&validation)?;

    let interface = InterfaceState::new(initial.w0.clone(), initial.w1.clone(), 0.0)?;
    let fluid = FluidState::new(initial.v0.clone(), 0.0);
    let mut state = CoupledState::new(fluid, interface)?;

    match cfg.mode {
        SolverMode::SemiImplicit => {
            let stepper = SemiImplicitStepper::new(grid);
            run_loop(cfg, state, validation, |s, c| stepper.step(s, c))
        }
        SolverMode::VorticityForm => {
            let stepper = VorticityFormStepper::new(grid);
            run_loop(cfg, state, validation, |s, c| stepper.step(s, c))
        }
        SolverMode::PicardWindow => {
            // delegated to the window iteration; keep the same record shape
            let mut records = Vec::new();
            let mut dissip_cum = 0.0;
            let first = DiagnosticsRecord::measure(&state, cfg.nu, 0.0, 0.0, &cfg.norms);
            let mut prev_rate = first.dissip_rate;
            records.push(first);
            let mut t = 0.0;
            let mut window = cfg.window.max(cfg.dt);
            let mut halvings = 0;
            while t < cfg.t_end - 0.5 * cfg.dt {
                let remaining = cfg.t_end - t;
                let this_window = window.min(remaining);
                match super::picard::picard_window(
                    &state,
                    this_window,
                    cfg.tolerances.picard,
                    cfg.tolerances.picard_max_sweeps,
                    cfg.nu,
                    cfg,
                ) {
                    Ok((next, report)) => {
                        state = next;
                        t = state.t();
                        let rate = damping_rate(&state, cfg.nu);
                        dissip_cum += 0.5 * (prev_rate + rate) * this_window;
                        prev_rate = rate;
                        records.push(DiagnosticsRecord::measure(
                            &state,
                            cfg.nu,
                            dissip_cum,
                            report.final_compat_residual,
                            &cfg.norms,
                        ));
                    }
                    Err(SolverError::NoContraction { .. }) if window > 4.0 * cfg.dt => {
                        window = (window / 2.0).max(4.0 * cfg.dt);
                        halvings += 1;
                        log::warn!("window iteration not contracting; halving the window to {window:.3e} ({halvings} so far)");
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(RunOutcome {
                records,
                final_state: state,
                exit: ExitReason::Completed,
                projections: 0,
                validation,
                recon_residual: None,
            })
        }
    }
}

fn damping_rate(state: &CoupledState, nu: f64) -> f64 {
    crate::plate::damping_dissipation(&state.interface, nu)
}

/// Advisory transport-stability bound: half the smallest cell crossing time.
pub fn cfl_limit(state: &CoupledState) -> f64 {
    let grid = state.grid();
    let map = &state.map;
    let mut rel = state.fluid.v.comp(3).clone();
    rel.axpy(-1.0, &map.psi_t);
    let vertical = rel.mul(&map.a33).max_abs();
    let horizontal = state.fluid.v.comp(1).max_abs().max(state.fluid.v.comp(2).max_abs());
    let h_min = grid.x3[1] - grid.x3[0];
    let dx = 1.0 / grid.n1.max(grid.n2) as f64;
    let crossing = (dx / horizontal.max(1e-300)).min(h_min / vertical.max(1e-300));
    0.5 * crossing
}

fn run_loop(
    cfg: &RunConfig,
    mut state: CoupledState,
    validation: super::validate::ValidationReport,
    step: impl Fn(&CoupledState, &RunConfig) -> Result<(CoupledState, StepInfo)>,
) -> Result<RunOutcome> {
    let steps = cfg.steps();
    let mut records = Vec::new();
    let mut dissip_cum = 0.0;
    let mut projections = 0;
    let mut recon_residual: Option<f64> = None;
    let divcurl = if cfg.recon_check_every > 0 { Some(DivCurlSolver::new(state.grid())) } else { None };
    records.push(DiagnosticsRecord::measure(&state, cfg.nu, 0.0, 0.0, &cfg.norms));
    for n in 1..=steps {
        let prev_rate = damping_rate(&state, cfg.nu);
        let (next, info) = match step(&state, cfg) {
            Ok(ok) => ok,
            Err(SolverError::GeometryAbort { min_j, max_j, a_dev }) => {
                log::error!(
                    "geometry monitor tripped at t={:.6} (J in [{min_j:.4},{max_j:.4}], |a-I|={a_dev:.4})",
                    state.t()
                );
                return Ok(RunOutcome {
                    exit: ExitReason::GeometryAbort { at: state.t() },
                    records,
                    final_state: state,
                    projections,
                    validation,
                    recon_residual,
                });
            }
            Err(e) => return Err(e),
        };
        if info.projection_size.is_some() {
            projections += 1;
        }
        let rate = damping_rate(&next, cfg.nu);
        dissip_cum += 0.5 * (prev_rate + rate) * cfg.dt;
        state = next;
        if n % cfg.cadence == 0 || n == steps {
            records.push(DiagnosticsRecord::measure(&state, cfg.nu, dissip_cum, 0.0, &cfg.norms));
            let limit = cfl_limit(&state);
            if cfg.dt > limit {
                log::warn!("dt {:.3e} exceeds the advisory transport limit {limit:.3e}", cfg.dt);
            }
        }
        if let Some(solver) = &divcurl {
            if n % cfg.recon_check_every == 0 {
                let zeta = ale_vorticity(&state.fluid.v, &state.map);
                let v = solver.reconstruct(
                    &zeta,
                    &state.interface.w_t,
                    Some(state.fluid.mean_flow),
                    &state.map,
                    cfg.tolerances.divcurl,
                    cfg.tolerances.divcurl_max_iter,
                    Some(&state.fluid.v),
                )?;
                let r = v.sub(&state.fluid.v).max_abs();
                recon_residual = Some(recon_residual.map_or(r, |m: f64| m.max(r)));
                log::info!("cross-solver reconstruction residual {r:.3e} at step {n}");
            }
        }
    }
    Ok(RunOutcome {
        records,
        final_state: state,
        exit: ExitReason::Completed,
        projections,
        validation,
        recon_residual,
    })
}

/// Interface trace of the normal cofactor velocity minus the plate velocity.
pub fn kinematic_residual(state: &CoupledState) -> f64 {
    let mut d = ops::cofactor_normal_component(&state.map, &state.fluid.v).trace(Boundary::Gamma1);
    d.axpy(-1.0, &state.interface.w_t);
    d.max_abs()
}

/// Convenience scalar field access for tests.
pub fn state_difference(a: &CoupledState, b: &CoupledState) -> f64 {
    let dv = a.fluid.v.sub(&b.fluid.v).l2_norm();
    let dw = a.interface.w.sub(&b.interface.w).l2_norm();
    let dwt = a.interface.w_t.sub(&b.interface.w_t).l2_norm();
    dv + dw + dwt
}

/// L2 distances used by the parameter sweeps.
pub fn state_distance_fields(
    v_a: &VectorField3D,
    v_b: &VectorField3D,
    w_a: &ScalarField2D,
    w_b: &ScalarField2D,
    wt_a: &ScalarField2D,
    wt_b: &ScalarField2D,
) -> f64 {
    v_a.sub(v_b).l2_norm() + w_a.sub(w_b).l2_norm() + wt_a.sub(wt_b).l2_norm()
}
