//! Geometry of the deforming channel.
//!
//! The channel interior is pulled back to the reference domain through the
//! map `(x1, x2, x3) -> (x1, x2, psi)` where `psi` extends `1 + w`
//! harmonically from the interface, vanishing on the bottom wall. All map
//! coefficients are assembled analytically per horizontal mode: the vertical
//! profile of mode `k` is a ratio of exponentials evaluated in a form that
//! never overflows, and vertical derivatives of map fields come from the
//! differentiated profiles rather than the collocation matrix, so identities
//! such as the vanishing column divergence of the cofactor matrix hold to
//! roundoff at any resolution.

use crate::error::{Result, SolverError};
use crate::fields::scalar::{Boundary, ScalarField2D, ScalarField3D};
use crate::fields::spectral::{self, TWO_PI};
use crate::fields::Grid;
use ndarray::Array3;
use rustfft::num_complex::Complex64;
use std::sync::Arc;

/// Plate displacement and velocity on the interface at a fixed time.
#[derive(Debug, Clone)]
pub struct InterfaceState {
    pub w: ScalarField2D,
    pub w_t: ScalarField2D,
    pub t: f64,
}

/// Tolerance on the interface-velocity mean; the zero mode of the plate is
/// conserved, so any drift signals corrupted forcing upstream.
pub const MEAN_TOL: f64 = 1e-12;

impl InterfaceState {
    pub fn new(w: ScalarField2D, w_t: ScalarField2D, t: f64) -> Result<Self> {
        let mean = w_t.mean();
        let scale = 1.0 + w_t.max_abs();
        if mean.abs() > MEAN_TOL * scale {
            return Err(SolverError::MeanViolation { mean });
        }
        let min_height = w.data.iter().fold(f64::INFINITY, |m, &v| m.min(1.0 + v));
        if min_height <= 0.0 {
            return Err(SolverError::ValidationFailed {
                summary: format!("interface touches the bottom wall (min 1+w = {min_height:.3e})"),
            });
        }
        Ok(Self { w, w_t, t })
    }

    /// Construction without the admissibility checks, for error-path tests
    /// and internal updates that preserve the invariants by design.
    pub fn new_unchecked(w: ScalarField2D, w_t: ScalarField2D, t: f64) -> Self {
        Self { w, w_t, t }
    }

    pub fn rest(grid: &Arc<Grid>) -> Self {
        Self { w: ScalarField2D::zeros(grid), w_t: ScalarField2D::zeros(grid), t: 0.0 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.w.grid
    }
}

/// Which vertical profile of a boundary mode to evaluate.
#[derive(Clone, Copy)]
enum Profile {
    Value,
    D3,
    D33,
}

/// Guard for absurd mode scales where even the stable exponential ratios
/// lose every significant digit.
const PROFILE_SCALE_LIMIT: f64 = 1e15;

/// sinh(beta x)/sinh(beta) and derivatives, evaluated as ratios of
/// non-positive exponentials.
fn eval_profile(beta: f64, x: f64, which: Profile) -> f64 {
    debug_assert!(beta > 0.0);
    let den = 1.0 - (-2.0 * beta).exp();
    let ep = (beta * (x - 1.0)).exp();
    let em = (-beta * (x + 1.0)).exp();
    match which {
        Profile::Value => (ep - em) / den,
        Profile::D3 => beta * (ep + em) / den,
        Profile::D33 => beta * beta * (ep - em) / den,
    }
}

/// Extend boundary data into the channel mode by mode. `zero_mode_linear`
/// selects the linear-in-x3 zero mode used by extensions of boundary data;
/// derivatives of that linear part follow from `which`.
fn extend_modal(
    grid: &Arc<Grid>,
    spectrum: &[Complex64],
    which: Profile,
    horizontal: impl Fn(usize) -> Complex64,
) -> Result<ScalarField3D> {
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let mut spec = Array3::<Complex64>::default((n3, n2, n1));
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let idx = i2 * n1 + i1;
            let coeff = spectrum[idx] * horizontal(idx);
            if coeff == Complex64::default() {
                continue;
            }
            let ks = spectral::ksq(grid, idx);
            if ks == 0.0 {
                for (i3, &x3) in grid.x3.iter().enumerate() {
                    let p = match which {
                        Profile::Value => x3,
                        Profile::D3 => 1.0,
                        Profile::D33 => 0.0,
                    };
                    spec[[i3, i2, i1]] = coeff * p;
                }
            } else {
                let beta = ks.sqrt();
                if !(beta.is_finite() && beta < PROFILE_SCALE_LIMIT) {
                    return Err(SolverError::OverflowGuard { mode_scale: beta });
                }
                for (i3, &x3) in grid.x3.iter().enumerate() {
                    spec[[i3, i2, i1]] = coeff * eval_profile(beta, x3, which);
                }
            }
        }
    }
    Ok(ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &spec) })
}

fn unit() -> impl Fn(usize) -> Complex64 {
    |_| Complex64::new(1.0, 0.0)
}

fn ik(grid: &Arc<Grid>, axis: usize) -> impl Fn(usize) -> Complex64 + '_ {
    let n1 = grid.n1;
    move |idx| {
        let (i1, i2) = (idx % n1, idx / n1);
        let k = match axis {
            1 => {
                if i1 == grid.n1 / 2 { 0 } else { grid.k1[i1] }
            }
            _ => {
                if i2 == grid.n2 / 2 { 0 } else { grid.k2[i2] }
            }
        };
        Complex64::new(0.0, TWO_PI * k as f64)
    }
}

fn ikik(grid: &Arc<Grid>, a: usize, b: usize) -> impl Fn(usize) -> Complex64 + '_ {
    let fa = ik(grid, a);
    let fb = ik(grid, b);
    move |idx| fa(idx) * fb(idx)
}

/// Harmonic extension of `1 + w`: vanishes on the bottom wall, matches
/// `1 + w` on the interface.
pub fn harmonic_extension(w: &ScalarField2D) -> Result<ScalarField3D> {
    let grid = &w.grid;
    let mut spec = spectral::fwd2(grid, &w.data);
    // the +1 offset only shifts the zero mode
    spec[0] += Complex64::new(grid.horizontal_len() as f64, 0.0);
    extend_modal(grid, &spec, Profile::Value, unit())
}

/// Extension of the interface velocity: vanishes on the bottom wall, matches
/// `w_t` on the interface, no constant offset.
pub fn harmonic_extension_rate(w_t: &ScalarField2D) -> Result<ScalarField3D> {
    let grid = &w_t.grid;
    let spec = spectral::fwd2(grid, &w_t.data);
    extend_modal(grid, &spec, Profile::Value, unit())
}

/// Coefficient matrices, Jacobian and rates of the channel map at one time.
///
/// Entry layout (row, column):
///
/// ```text
/// a = [ 1    0    0  ]        b = [ J      0     0 ]
///     [ 0    1    0  ]            [ 0      J     0 ]
///     [ a31  a32  a33]            [ -d1psi -d2psi 1]
/// ```
#[derive(Debug, Clone)]
pub struct AleMap {
    pub grid: Arc<Grid>,
    pub psi: ScalarField3D,
    pub psi_t: ScalarField3D,
    /// J = d3 psi.
    pub j: ScalarField3D,
    pub j_t: ScalarField3D,
    pub psi_1: ScalarField3D,
    pub psi_2: ScalarField3D,
    pub psi_t_1: ScalarField3D,
    pub psi_t_2: ScalarField3D,
    pub psi_11: ScalarField3D,
    pub psi_12: ScalarField3D,
    pub psi_22: ScalarField3D,
    pub psi_13: ScalarField3D,
    pub psi_23: ScalarField3D,
    pub psi_33: ScalarField3D,
    pub a31: ScalarField3D,
    pub a32: ScalarField3D,
    /// a33 = 1/J.
    pub a33: ScalarField3D,
}

impl AleMap {
    pub fn b31(&self) -> ScalarField3D {
        self.psi_1.map(|v| -v)
    }

    pub fn b32(&self) -> ScalarField3D {
        self.psi_2.map(|v| -v)
    }

    /// Entries of the cofactor-matrix rate: d/dt of (J, J, -d1psi, -d2psi).
    pub fn b_t_diag(&self) -> &ScalarField3D {
        &self.j_t
    }

    pub fn b_t_31(&self) -> ScalarField3D {
        self.psi_t_1.map(|v| -v)
    }

    pub fn b_t_32(&self) -> ScalarField3D {
        self.psi_t_2.map(|v| -v)
    }

    /// Rate of the inverse-map matrix, by direct differentiation of the
    /// closed-form entries.
    pub fn a_t_row3(&self) -> (ScalarField3D, ScalarField3D, ScalarField3D) {
        let inv_j = &self.a33;
        let inv_j2 = inv_j.mul(inv_j);
        let mut t31 = self.psi_t_1.mul(inv_j);
        t31.scale(-1.0);
        t31.add_assign(&self.psi_1.mul(&self.j_t).mul(&inv_j2));
        let mut t32 = self.psi_t_2.mul(inv_j);
        t32.scale(-1.0);
        t32.add_assign(&self.psi_2.mul(&self.j_t).mul(&inv_j2));
        let mut t33 = self.j_t.mul(&inv_j2);
        t33.scale(-1.0);
        (t31, t32, t33)
    }

    /// max_j || sum_i d_i b_ij ||_inf, horizontal derivatives spectral on the
    /// stored entries, vertical derivatives from the analytic profiles.
    pub fn piola_residual(&self) -> f64 {
        let col1 = self.j.diff(1).sub(&self.psi_13);
        let col2 = self.j.diff(2).sub(&self.psi_23);
        let col3 = ScalarField3D::constant(&self.grid, 1.0).diff(3);
        col1.max_abs().max(col2.max_abs()).max(col3.max_abs())
    }

    /// || Lap psi ||_inf from the analytic derivative fields.
    pub fn harmonic_residual(&self) -> f64 {
        let mut r = self.psi_11.clone();
        r.add_assign(&self.psi_22);
        r.add_assign(&self.psi_33);
        r.max_abs()
    }

    /// Entrywise residual of b - J a; the diagonal entries agree by
    /// construction, so only the third row is informative.
    pub fn cofactor_residual(&self) -> f64 {
        let r31 = self.b31().sub(&self.j.mul(&self.a31));
        let r32 = self.b32().sub(&self.j.mul(&self.a32));
        let r33 = ScalarField3D::constant(&self.grid, 1.0).sub(&self.j.mul(&self.a33));
        r31.max_abs().max(r32.max_abs()).max(r33.max_abs())
    }

    pub fn min_j(&self) -> f64 {
        self.j.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_j(&self) -> f64 {
        self.j.data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// || a - I ||_inf over all entries.
    pub fn a_deviation(&self) -> f64 {
        self.a31
            .max_abs()
            .max(self.a32.max_abs())
            .max(self.a33.map(|v| v - 1.0).max_abs())
    }

    pub fn b_deviation(&self) -> f64 {
        self.j
            .map(|v| v - 1.0)
            .max_abs()
            .max(self.psi_1.max_abs())
            .max(self.psi_2.max_abs())
    }
}

/// Assemble the full map from an interface state.
pub fn build_map(state: &InterfaceState) -> Result<AleMap> {
    let grid = state.grid().clone();
    let mut wspec = spectral::fwd2(&grid, &state.w.data);
    wspec[0] += Complex64::new(grid.horizontal_len() as f64, 0.0);
    let wtspec = spectral::fwd2(&grid, &state.w_t.data);

    let psi = extend_modal(&grid, &wspec, Profile::Value, unit())?;
    let j = extend_modal(&grid, &wspec, Profile::D3, unit())?;
    let psi_33 = extend_modal(&grid, &wspec, Profile::D33, unit())?;
    let psi_1 = extend_modal(&grid, &wspec, Profile::Value, ik(&grid, 1))?;
    let psi_2 = extend_modal(&grid, &wspec, Profile::Value, ik(&grid, 2))?;
    let psi_11 = extend_modal(&grid, &wspec, Profile::Value, ikik(&grid, 1, 1))?;
    let psi_12 = extend_modal(&grid, &wspec, Profile::Value, ikik(&grid, 1, 2))?;
    let psi_22 = extend_modal(&grid, &wspec, Profile::Value, ikik(&grid, 2, 2))?;
    let psi_13 = extend_modal(&grid, &wspec, Profile::D3, ik(&grid, 1))?;
    let psi_23 = extend_modal(&grid, &wspec, Profile::D3, ik(&grid, 2))?;

    let psi_t = extend_modal(&grid, &wtspec, Profile::Value, unit())?;
    let j_t = extend_modal(&grid, &wtspec, Profile::D3, unit())?;
    let psi_t_1 = extend_modal(&grid, &wtspec, Profile::Value, ik(&grid, 1))?;
    let psi_t_2 = extend_modal(&grid, &wtspec, Profile::Value, ik(&grid, 2))?;

    let min_j = j.data.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min_j <= 0.0 {
        return Err(SolverError::DegenerateJacobian { min_j });
    }

    let inv_j = j.map(|v| 1.0 / v);
    let mut a31 = psi_1.mul(&inv_j);
    a31.scale(-1.0);
    let mut a32 = psi_2.mul(&inv_j);
    a32.scale(-1.0);

    Ok(AleMap {
        grid,
        psi,
        psi_t,
        j,
        j_t,
        psi_1,
        psi_2,
        psi_t_1,
        psi_t_2,
        psi_11,
        psi_12,
        psi_22,
        psi_13,
        psi_23,
        psi_33,
        a31,
        a32,
        a33: inv_j,
    })
}

/// Monitor thresholds for the geometry of a run.
#[derive(Debug, Clone, Copy)]
pub struct GeometryThresholds {
    pub j_min: f64,
    pub j_max: f64,
    pub a_dev_max: f64,
}

impl Default for GeometryThresholds {
    fn default() -> Self {
        Self { j_min: 0.5, j_max: 1.5, a_dev_max: 0.25 }
    }
}

#[derive(Debug, Clone)]
pub struct MonitorReport {
    pub a_dev: f64,
    pub b_dev: f64,
    pub j_dev: f64,
    pub min_j: f64,
    pub max_j: f64,
    pub j_band_violated: bool,
    pub a_dev_violated: bool,
}

impl MonitorReport {
    pub fn ok(&self) -> bool {
        !(self.j_band_violated || self.a_dev_violated)
    }
}

/// Report-only geometry check; the driver decides whether to abort.
pub fn monitor_geometry(map: &AleMap, thresholds: &GeometryThresholds) -> MonitorReport {
    let min_j = map.min_j();
    let max_j = map.max_j();
    let a_dev = map.a_deviation();
    MonitorReport {
        a_dev,
        b_dev: map.b_deviation(),
        j_dev: map.j.map(|v| v - 1.0).max_abs(),
        min_j,
        max_j,
        j_band_violated: min_j < thresholds.j_min || max_j > thresholds.j_max,
        a_dev_violated: a_dev > thresholds.a_dev_max,
    }
}

/// Traces of the transported-interface defects used by boundary conditions:
/// on the bottom wall the third cofactor row is exactly (0, 0, 1) and the
/// extension rate vanishes.
pub fn bottom_row_residual(map: &AleMap) -> f64 {
    map.b31()
        .trace(Boundary::Gamma0)
        .max_abs()
        .max(map.b32().trace(Boundary::Gamma0).max_abs())
        .max(map.psi_t.trace(Boundary::Gamma0).max_abs())
}
