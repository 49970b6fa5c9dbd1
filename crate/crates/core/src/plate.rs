//! Damped fourth-order plate dynamics on the interface.
//!
//! Each horizontal Fourier mode obeys an independent linear oscillator
//!
//!   y'' + nu |2 pi k|^2 y' + |2 pi k|^4 y = f_k,
//!
//! advanced by the exact variation-of-constants formula with the forcing held
//! constant over the step. The stiff fourth-order term therefore imposes no
//! step-size restriction. The zero mode carries no dynamics: forcing is
//! projected to zero mean (the projection is logged) and the mode is left
//! unchanged.

use crate::ale::InterfaceState;
use crate::error::{Result, SolverError};
use crate::fields::scalar::ScalarField2D;
use crate::fields::spectral;
use rustfft::num_complex::Complex64;

/// Pressure trace driving the plate; zero mean up to assembly error.
#[derive(Debug, Clone)]
pub struct PlateForcing {
    pub q_trace: ScalarField2D,
}

impl PlateForcing {
    pub fn new(q_trace: ScalarField2D) -> Self {
        Self { q_trace }
    }

    pub fn zero(grid: &std::sync::Arc<crate::fields::Grid>) -> Self {
        Self { q_trace: ScalarField2D::zeros(grid) }
    }
}

/// Hard gate on the forcing mean; values below it are projected out
/// silently, values above it indicate a broken normalization upstream.
pub const FORCING_MEAN_GATE: f64 = 1e-8;

/// Advance the plate by `dt` under frozen forcing.
pub fn plate_step(
    state: &InterfaceState,
    forcing: &PlateForcing,
    nu: f64,
    dt: f64,
) -> Result<InterfaceState> {
    assert!(dt > 0.0, "plate step requires dt > 0");
    assert!(nu >= 0.0, "damping must be nonnegative");
    let grid = state.grid().clone();
    let n = grid.horizontal_len() as f64;

    let mut fhat = spectral::fwd2(&grid, &forcing.q_trace.data);
    let mean = fhat[0].re / n;
    let scale = 1.0 + forcing.q_trace.max_abs();
    if mean.abs() > FORCING_MEAN_GATE * scale {
        return Err(SolverError::MeanViolation { mean });
    }
    if mean.abs() > 1e-13 * scale {
        log::debug!("plate forcing mean {:.3e} projected out", mean);
    }
    fhat[0] = Complex64::default();

    let mut what = spectral::fwd2(&grid, &state.w.data);
    let mut wthat = spectral::fwd2(&grid, &state.w_t.data);
    for idx in 0..what.len() {
        let mu = spectral::ksq(&grid, idx);
        if mu == 0.0 {
            continue;
        }
        let (w_new, wt_new) = mode_step(what[idx], wthat[idx], fhat[idx], mu, nu, dt);
        what[idx] = w_new;
        wthat[idx] = wt_new;
    }
    let w = ScalarField2D::from_spectrum(&grid, what);
    let w_t = ScalarField2D::from_spectrum(&grid, wthat);
    Ok(InterfaceState::new_unchecked(w, w_t, state.t + dt))
}

/// Exact one-mode advance; `mu = |2 pi k|^2 > 0`.
fn mode_step(
    w: Complex64,
    wt: Complex64,
    f: Complex64,
    mu: f64,
    nu: f64,
    dt: f64,
) -> (Complex64, Complex64) {
    let s = mu * mu;
    let c = nu * mu;
    let wp = f / s;
    let u0 = w - wp;
    let v0 = wt;
    let disc = c * c - 4.0 * s;
    let tol = 1e-9 * (c * c + 4.0 * s);
    let (u, v) = if disc < -tol {
        let om = (4.0 * s - c * c).sqrt() / 2.0;
        let sg = -c / 2.0;
        let e = (sg * dt).exp();
        let (sin, cos) = (om * dt).sin_cos();
        let a = u0;
        let b = (v0 - sg * u0) / om;
        (
            e * (a * cos + b * sin),
            e * ((sg * a + om * b) * cos + (sg * b - om * a) * sin),
        )
    } else if disc > tol {
        let rt = disc.sqrt() / 2.0;
        let rp = -c / 2.0 + rt;
        let rm = -c / 2.0 - rt;
        let a = (v0 - rm * u0) / (rp - rm);
        let b = u0 - a;
        let ep = (rp * dt).exp();
        let em = (rm * dt).exp();
        (a * ep + b * em, a * rp * ep + b * rm * em)
    } else {
        // repeated root
        let r = -c / 2.0;
        let p = u0;
        let q = v0 - r * u0;
        let e = (r * dt).exp();
        ((p + q * dt) * e, (q + r * (p + q * dt)) * e)
    };
    (u + wp, v)
}

/// Kinetic and bending energy of the plate.
pub fn plate_energy(state: &InterfaceState) -> (f64, f64) {
    let grid = state.grid();
    let n = grid.horizontal_len() as f64;
    let what = spectral::fwd2(grid, &state.w.data);
    let wthat = spectral::fwd2(grid, &state.w_t.data);
    let mut kin = 0.0;
    let mut bend = 0.0;
    for idx in 0..what.len() {
        let mu = spectral::ksq(grid, idx);
        kin += (wthat[idx] / n).norm_sqr();
        bend += mu * mu * (what[idx] / n).norm_sqr();
    }
    (0.5 * kin, 0.5 * bend)
}

/// Instantaneous damping rate `nu || grad_h w_t ||^2`.
pub fn damping_dissipation(state: &InterfaceState, nu: f64) -> f64 {
    if nu == 0.0 {
        return 0.0;
    }
    let grid = state.grid();
    let n = grid.horizontal_len() as f64;
    let wthat = spectral::fwd2(grid, &state.w_t.data);
    let mut total = 0.0;
    for idx in 0..wthat.len() {
        total += spectral::ksq(grid, idx) * (wthat[idx] / n).norm_sqr();
    }
    nu * total
}

/// Plate acceleration recovered from the equation of motion.
pub fn plate_acceleration(state: &InterfaceState, forcing: &PlateForcing, nu: f64) -> ScalarField2D {
    let bilap = state.w.apply_multiplier(|ks| ks * ks);
    let mut acc = forcing.q_trace.clone();
    let mut damped = state.w_t.laplacian();
    damped.scale(nu);
    acc.add_assign(&damped);
    acc.axpy(-1.0, &bilap);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::spectral::TWO_PI;
    use crate::fields::Grid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::new(16, 16, 9)
    }

    fn rest_with(w: ScalarField2D, wt: ScalarField2D) -> InterfaceState {
        InterfaceState::new_unchecked(w, wt, 0.0)
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = grid();
        let mut state = InterfaceState::rest(&g);
        let forcing = PlateForcing::zero(&g);
        for _ in 0..10 {
            state = plate_step(&state, &forcing, 0.0, 0.01).unwrap();
        }
        assert!(state.w.max_abs() < 1e-15 && state.w_t.max_abs() < 1e-15);
    }

    #[test]
    fn undamped_single_mode_returns_after_one_period() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let mut state = rest_with(w.clone(), ScalarField2D::zeros(&g));
        let forcing = PlateForcing::zero(&g);
        let mu = TWO_PI * TWO_PI;
        let period = 2.0 * std::f64::consts::PI / mu; // = 1 / (2 pi)
        let steps = 128;
        let dt = period / steps as f64;
        for _ in 0..steps {
            state = plate_step(&state, &forcing, 0.0, dt).unwrap();
        }
        let err = state.w.sub(&w).max_abs() / w.max_abs();
        assert!(err <= 1e-10, "period error {err}");
    }

    #[test]
    fn damped_mode_tracks_the_root_formula() {
        let g = grid();
        let nu = 0.3;
        let mu = TWO_PI * TWO_PI;
        let w = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let mut state = rest_with(w, ScalarField2D::zeros(&g));
        let forcing = PlateForcing::zero(&g);
        let dt = 3e-3;
        // underdamped closed form with w(0) = 1, w'(0) = 0 per mode
        let sg = -nu * mu / 2.0;
        let om = (4.0 * mu * mu - nu * nu * mu * mu).sqrt() / 2.0;
        for step in 1..=10 {
            state = plate_step(&state, &forcing, nu, dt).unwrap();
            let t = dt * step as f64;
            let amp = (sg * t).exp() * ((om * t).cos() - sg / om * (om * t).sin());
            let probe = state.w.data[[0, 0]];
            assert!((probe - amp).abs() <= 1e-8, "step {step}: {probe} vs {amp}");
        }
    }

    #[test]
    fn repeated_root_branch_is_finite_and_decaying() {
        let g = grid();
        // nu = 2 makes every mode critically damped
        let w = ScalarField2D::from_fn(&g, |x1, x2| (TWO_PI * x1).cos() + (TWO_PI * x2).sin());
        let mut state = rest_with(w.clone(), ScalarField2D::zeros(&g));
        let forcing = PlateForcing::zero(&g);
        for _ in 0..50 {
            state = plate_step(&state, &forcing, 2.0, 5e-3).unwrap();
        }
        assert!(state.w.is_finite());
        assert!(state.w.max_abs() < w.max_abs());
    }

    #[test]
    fn energy_examples() {
        let g = grid();
        let (ek, eb) = plate_energy(&InterfaceState::rest(&g));
        assert_eq!((ek, eb), (0.0, 0.0));
        let w = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let (ek, eb) = plate_energy(&rest_with(w, ScalarField2D::zeros(&g)));
        assert!(ek.abs() < 1e-15);
        assert_relative_eq!(eb, 4.0 * std::f64::consts::PI.powi(4), max_relative = 1e-12);
        let wt = ScalarField2D::from_fn(&g, |_, x2| (TWO_PI * x2).cos());
        let (ek, eb) = plate_energy(&rest_with(ScalarField2D::zeros(&g), wt));
        assert_relative_eq!(ek, 0.25, max_relative = 1e-12);
        assert!(eb.abs() < 1e-15);
    }

    #[test]
    fn dissipation_examples() {
        let g = grid();
        let wt = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let state = rest_with(ScalarField2D::zeros(&g), wt);
        assert_eq!(damping_dissipation(&state, 0.0), 0.0);
        assert_relative_eq!(
            damping_dissipation(&state, 1.0),
            2.0 * std::f64::consts::PI.powi(2),
            max_relative = 1e-12
        );
        let flat = rest_with(ScalarField2D::zeros(&g), ScalarField2D::constant(&g, 0.3));
        assert!(damping_dissipation(&flat, 1.0) < 1e-15);
    }

    #[test]
    fn unforced_undamped_energy_is_conserved_over_many_steps() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, x2| 0.3 * (TWO_PI * x1).cos() + 0.1 * (TWO_PI * (x1 + x2)).sin());
        let mut wt = ScalarField2D::from_fn(&g, |_, x2| 0.2 * (TWO_PI * 2.0 * x2).cos());
        wt.project_zero_mean();
        let mut state = rest_with(w, wt);
        let forcing = PlateForcing::zero(&g);
        let (k0, b0) = plate_energy(&state);
        let e0 = k0 + b0;
        for _ in 0..1000 {
            state = plate_step(&state, &forcing, 0.0, 1e-3).unwrap();
        }
        let (k1, b1) = plate_energy(&state);
        assert!(((k1 + b1) - e0).abs() / e0 <= 1e-10);
    }

    #[test]
    fn forced_energy_identity_improves_at_third_order() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, _| 0.1 * (TWO_PI * x1).cos());
        let mut wt = ScalarField2D::from_fn(&g, |_, x2| 0.05 * (TWO_PI * x2).sin());
        wt.project_zero_mean();
        let q = ScalarField2D::from_fn(&g, |x1, x2| 0.4 * (TWO_PI * x1).sin() + 0.2 * (TWO_PI * x2).cos());
        let forcing = PlateForcing::new(q);
        let nu = 0.2;
        let state0 = rest_with(w, wt);
        let residual = |dt: f64| -> f64 {
            let state1 = plate_step(&state0, &forcing, nu, dt).unwrap();
            let (k0, b0) = plate_energy(&state0);
            let (k1, b1) = plate_energy(&state1);
            // trapezoid for the work and dissipation integrals
            let work0 = forcing.q_trace.mul(&state0.w_t).mean();
            let work1 = forcing.q_trace.mul(&state1.w_t).mean();
            let d0 = damping_dissipation(&state0, nu);
            let d1 = damping_dissipation(&state1, nu);
            ((k1 + b1) - (k0 + b0) + dt / 2.0 * (d0 + d1) - dt / 2.0 * (work0 + work1)).abs()
        };
        let r1 = residual(2e-3);
        let r2 = residual(1e-3);
        let order = (r1 / r2).log2();
        assert!(order >= 2.7, "observed order {order} ({r1:.3e} vs {r2:.3e})");
    }

    #[test]
    fn bounded_forcing_keeps_the_state_bounded() {
        let g = grid();
        let q = ScalarField2D::from_fn(&g, |x1, x2| 0.5 * (TWO_PI * x1).sin() - 0.3 * (TWO_PI * 2.0 * x2).cos());
        let forcing = PlateForcing::new(q);
        let mut state = InterfaceState::rest(&g);
        for _ in 0..2000 {
            state = plate_step(&state, &forcing, 0.1, 5e-3).unwrap();
        }
        let bound = 10.0 * (1.0 + forcing.q_trace.max_abs());
        assert!(state.w.max_abs() + state.w_t.max_abs() < bound);
    }

    #[test]
    fn forcing_with_large_mean_is_rejected() {
        let g = grid();
        let forcing = PlateForcing::new(ScalarField2D::constant(&g, 0.5));
        let err = plate_step(&InterfaceState::rest(&g), &forcing, 0.0, 0.01).unwrap_err();
        assert!(matches!(err, SolverError::MeanViolation { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn zero_mean_is_preserved_under_zero_mean_forcing(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let g = Grid::new(8, 8, 9);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut q = ScalarField2D::from_fn(&g, |x1, x2| {
                (TWO_PI * x1).sin() + 0.3 * (TWO_PI * (x1 + 2.0 * x2)).cos()
            });
            q.scale(rng.gen_range(0.1..2.0));
            q.project_zero_mean();
            let amp = rng.gen_range(0.01..0.2);
            let mut wt = ScalarField2D::from_fn(&g, |x1, _| amp * (TWO_PI * x1).sin());
            wt.project_zero_mean();
            let mut state = rest_with(ScalarField2D::zeros(&g), wt);
            let forcing = PlateForcing::new(q);
            for _ in 0..20 {
                state = plate_step(&state, &forcing, 0.05, 0.01).unwrap();
            }
            prop_assert!(state.w_t.mean().abs() <= 1e-12);
        }
    }
}
