//! Fluid solve under a prescribed interface path.
//!
//! The interface displacement, velocity, and acceleration are given as a
//! time series sampled at half-step granularity; the velocity advances with
//! the four-stage scheme, and the pressure solves the Neumann problem whose
//! data carry the prescribed acceleration and the constant mean correction.
//! The variable divergence and both wall defects are recorded every step:
//! the continuous dynamics transports them from zero initial data, so their
//! discrete size is a direct measure of the recovery quality.

use super::config::RunConfig;
use crate::ale::{build_map, AleMap, InterfaceState};
use crate::error::{Result, SolverError};
use crate::euler::{momentum_rhs, FluidState};
use crate::fields::scalar::{Boundary, ScalarField2D};
use crate::fields::vector::VectorField3D;
use crate::fields::Grid;
use crate::ops;
use crate::plate::{plate_acceleration, plate_step, PlateForcing};
use crate::pressure::{assemble_neumann_problem, BcKind, EllipticSolver, PressureField};
use std::sync::Arc;

/// Prescribed interface path sampled at half-step granularity.
#[derive(Debug, Clone)]
pub struct WPath {
    pub t0: f64,
    /// Half-step spacing between consecutive samples.
    pub half_dt: f64,
    pub w: Vec<ScalarField2D>,
    pub w_t: Vec<ScalarField2D>,
    pub w_tt: Vec<ScalarField2D>,
}

impl WPath {
    /// A path frozen at one state (zero acceleration).
    pub fn frozen(grid: &Arc<Grid>, w: &ScalarField2D, w_t: &ScalarField2D, t0: f64, dt: f64, steps: usize) -> Self {
        let n = 2 * steps + 1;
        Self {
            t0,
            half_dt: 0.5 * dt,
            w: vec![w.clone(); n],
            w_t: vec![w_t.clone(); n],
            w_tt: vec![ScalarField2D::zeros(grid); n],
        }
    }

    /// Sample from closures of time (evaluated at half-step points).
    pub fn from_fn(
        t0: f64,
        dt: f64,
        steps: usize,
        w: impl Fn(f64) -> ScalarField2D,
        w_t: impl Fn(f64) -> ScalarField2D,
        w_tt: impl Fn(f64) -> ScalarField2D,
    ) -> Self {
        let n = 2 * steps + 1;
        let half = 0.5 * dt;
        let times: Vec<f64> = (0..n).map(|i| t0 + half * i as f64).collect();
        Self {
            t0,
            half_dt: half,
            w: times.iter().map(|&t| w(t)).collect(),
            w_t: times.iter().map(|&t| w_t(t)).collect(),
            w_tt: times.iter().map(|&t| w_tt(t)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn steps(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// Index of the sample at time `t`; `t` must sit on the half-step grid.
    pub fn index_of(&self, t: f64) -> usize {
        let x = (t - self.t0) / self.half_dt;
        let i = x.round() as usize;
        debug_assert!((x - i as f64).abs() < 1e-6, "time {t} off the sample grid");
        i.min(self.len() - 1)
    }

    pub fn interface_at(&self, t: f64) -> InterfaceState {
        let i = self.index_of(t);
        InterfaceState::new_unchecked(self.w[i].clone(), self.w_t[i].clone(), t)
    }

    pub fn w_tt_at(&self, t: f64) -> &ScalarField2D {
        &self.w_tt[self.index_of(t)]
    }
}

/// One record per step of the given-coefficient solve.
#[derive(Debug, Clone, Default)]
pub struct RecoveryRecord {
    pub t: f64,
    /// Sup norm of the cofactor-form divergence.
    pub divergence: f64,
    /// Interface defect `b_{3i} v_i - w_t`.
    pub defect_top: f64,
    /// Bottom-wall normal velocity.
    pub defect_bottom: f64,
    /// Solvability residual of the Neumann data.
    pub compat: f64,
}

#[derive(Debug)]
pub struct GivenCoeffTrajectory {
    /// Velocity at every full step including both endpoints.
    pub v: Vec<VectorField3D>,
    /// Interface pressure trace at every half step.
    pub q_traces: Vec<ScalarField2D>,
    pub records: Vec<RecoveryRecord>,
    pub t0: f64,
    pub dt: f64,
}

impl GivenCoeffTrajectory {
    pub fn final_velocity(&self) -> &VectorField3D {
        self.v.last().expect("nonempty trajectory")
    }

    pub fn worst_divergence(&self) -> f64 {
        self.records.iter().fold(0.0f64, |m, r| m.max(r.divergence))
    }

    pub fn worst_defects(&self) -> (f64, f64) {
        self.records.iter().fold((0.0f64, 0.0f64), |(a, b), r| {
            (a.max(r.defect_top), b.max(r.defect_bottom))
        })
    }
}

pub struct GivenCoefficientSolver {
    neumann: EllipticSolver,
}

impl GivenCoefficientSolver {
    pub fn new(grid: &Arc<Grid>) -> Self {
        Self { neumann: EllipticSolver::new(grid, BcKind::Neumann) }
    }

    fn stage(
        &self,
        v: &VectorField3D,
        map: &AleMap,
        interface: &InterfaceState,
        w_tt: &ScalarField2D,
        cfg: &RunConfig,
        warm: Option<&PressureField>,
    ) -> Result<(VectorField3D, PressureField, f64)> {
        let problem = assemble_neumann_problem(v, map, w_tt, interface);
        let (q, stats) = self.neumann.solve(
            &problem,
            cfg.tolerances.elliptic,
            cfg.tolerances.elliptic_max_iter,
            warm,
        )?;
        let k = momentum_rhs(v, &q, map)?;
        Ok((k, q, stats.compat_residual.unwrap_or(0.0)))
    }

    /// Advance the velocity along the whole prescribed path.
    pub fn solve(
        &self,
        path: &WPath,
        v0: &FluidState,
        cfg: &RunConfig,
    ) -> Result<GivenCoeffTrajectory> {
        let steps = path.steps();
        let dt = 2.0 * path.half_dt;
        let mut v = v0.v.clone();
        let mut t = path.t0;
        let mut q_last: Option<PressureField> = None;
        let mut traj = GivenCoeffTrajectory {
            v: Vec::with_capacity(steps + 1),
            q_traces: Vec::with_capacity(2 * steps + 1),
            records: Vec::with_capacity(steps + 1),
            t0: path.t0,
            dt,
        };
        traj.v.push(v.clone());

        for _step in 0..steps {
            // stage 1 at t
            let itf0 = path.interface_at(t);
            let map0 = build_map(&itf0)?;
            let (k1, q1, compat) = self.stage(&v, &map0, &itf0, path.w_tt_at(t), cfg, q_last.as_ref())?;
            traj.q_traces.push(q1.interface_trace());
            traj.records.push(recovery_record(&v, &map0, &itf0, t, compat));

            // stages 2 and 3 at t + dt/2
            let tm = t + path.half_dt;
            let itf_m = path.interface_at(tm);
            let map_m = build_map(&itf_m)?;
            let mut v2 = v.clone();
            v2.axpy(0.5 * dt, &k1);
            let (k2, q2, _) = self.stage(&v2, &map_m, &itf_m, path.w_tt_at(tm), cfg, Some(&q1))?;
            traj.q_traces.push(q2.interface_trace());
            let mut v3 = v.clone();
            v3.axpy(0.5 * dt, &k2);
            let (k3, q3, _) = self.stage(&v3, &map_m, &itf_m, path.w_tt_at(tm), cfg, Some(&q2))?;

            // stage 4 at t + dt
            let te = t + dt;
            let itf_e = path.interface_at(te);
            let map_e = build_map(&itf_e)?;
            let mut v4 = v.clone();
            v4.axpy(dt, &k3);
            let (k4, q4, _) = self.stage(&v4, &map_e, &itf_e, path.w_tt_at(te), cfg, Some(&q3))?;

            v.axpy(dt / 6.0, &k1);
            v.axpy(dt / 3.0, &k2);
            v.axpy(dt / 3.0, &k3);
            v.axpy(dt / 6.0, &k4);
            v.dealias();
            t = te;
            q_last = Some(q4);
            traj.v.push(v.clone());
        }

        // endpoint pressure and recovery record
        let itf = path.interface_at(t);
        let map = build_map(&itf)?;
        let (_, q_end, compat) = self.stage(&v, &map, &itf, path.w_tt_at(t), cfg, q_last.as_ref())?;
        traj.q_traces.push(q_end.interface_trace());
        traj.records.push(recovery_record(&v, &map, &itf, t, compat));
        Ok(traj)
    }
}

fn recovery_record(
    v: &VectorField3D,
    map: &AleMap,
    interface: &InterfaceState,
    t: f64,
    compat: f64,
) -> RecoveryRecord {
    let divergence = ops::cofactor_divergence(map, v).max_abs();
    let defect_top = {
        let mut d = ops::cofactor_normal_component(map, v).trace(Boundary::Gamma1);
        d.axpy(-1.0, &interface.w_t);
        d.max_abs()
    };
    RecoveryRecord {
        t,
        divergence,
        defect_top,
        defect_bottom: v.comp(3).trace(Boundary::Gamma0).max_abs(),
        compat,
    }
}

/// One-shot wrapper constructing the solver.
pub fn solve_euler_given_coefficients(
    path: &WPath,
    v0: &FluidState,
    cfg: &RunConfig,
) -> Result<GivenCoeffTrajectory> {
    if path.is_empty() {
        return Err(SolverError::ValidationFailed { summary: "empty interface path".into() });
    }
    GivenCoefficientSolver::new(v0.grid()).solve(path, v0, cfg)
}

/// Build the interface path of an unforced damped plate, sampled at
/// half-step granularity together with its accelerations.
pub fn unforced_plate_path(
    interface: &InterfaceState,
    nu: f64,
    dt: f64,
    steps: usize,
) -> Result<WPath> {
    let grid = interface.grid().clone();
    let zero = PlateForcing::zero(&grid);
    let mut w = Vec::with_capacity(2 * steps + 1);
    let mut w_t = Vec::with_capacity(2 * steps + 1);
    let mut w_tt = Vec::with_capacity(2 * steps + 1);
    let mut current = interface.clone();
    for i in 0..=(2 * steps) {
        if i > 0 {
            current = plate_step(&current, &zero, nu, 0.5 * dt)?;
        }
        w.push(current.w.clone());
        w_t.push(current.w_t.clone());
        w_tt.push(plate_acceleration(&current, &zero, nu));
    }
    Ok(WPath { t0: interface.t, half_dt: 0.5 * dt, w, w_t, w_tt })
}
