//! Pressure problems on the deforming channel.
//!
//! The pressure satisfies a variable-coefficient elliptic equation whose
//! coefficient matrix `d = J a a^T` stays close to the identity while the
//! geometry monitor passes. The solver iterates on the exactly solvable
//! constant-coefficient channel problem, lagging both the interior
//! perturbation divergence and the variable part of the boundary flux; every
//! constant-coefficient sweep is a bank of independent vertical two-point
//! boundary-value problems, one per horizontal mode, prefactored once.
//!
//! Boundary fluxes are taken in the upward conormal direction on both walls:
//! the interface condition is `d_{3k} dk q + q = g1` in Robin form or
//! `d_{3k} dk q = g1` in Neumann form, and the bottom condition is
//! `d_{3k} dk q = g0`. The Neumann problem requires the solvability identity
//! between the volume source and the interface flux; the given-coefficient
//! assembly restores it with a constant mean correction.

use crate::ale::{AleMap, InterfaceState};
use crate::error::{Result, SolverError};
use crate::fields::scalar::{Boundary, ScalarField2D, ScalarField3D};
use crate::fields::spectral;
use crate::fields::vector::VectorField3D;
use crate::fields::Grid;
use crate::linalg::LuFactors;
use crate::ops;
use ndarray::{Array2, Array3};
use rustfft::num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    Robin,
    Neumann,
}

/// Which interior right-hand-side form to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsForm {
    /// Divergence of a flux built directly from the momentum balance.
    Raw,
    /// Scalar form in which the second velocity derivatives cancel.
    Simplified,
}

/// Symmetric coefficient matrix `d = J a a^T`.
#[derive(Debug, Clone)]
pub struct DCoefficients {
    pub d11: ScalarField3D,
    pub d13: ScalarField3D,
    pub d22: ScalarField3D,
    pub d23: ScalarField3D,
    pub d33: ScalarField3D,
}

impl DCoefficients {
    pub fn from_map(map: &AleMap) -> Self {
        let d13 = map.psi_1.map(|v| -v);
        let d23 = map.psi_2.map(|v| -v);
        let mut d33 = map.psi_1.mul(&map.psi_1);
        d33.add_assign(&map.psi_2.mul(&map.psi_2));
        d33 = d33.map(|v| v + 1.0).mul(&map.a33);
        Self { d11: map.j.clone(), d13, d22: map.j.clone(), d23, d33 }
    }

    /// `|| d - I ||_inf` over all entries.
    pub fn identity_deviation(&self) -> f64 {
        self.d11
            .map(|v| v - 1.0)
            .max_abs()
            .max(self.d22.map(|v| v - 1.0).max_abs())
            .max(self.d33.map(|v| v - 1.0).max_abs())
            .max(self.d13.max_abs())
            .max(self.d23.max_abs())
    }
}

/// Interior source: a flux whose divergence drives the equation, or a plain
/// scalar right-hand side.
#[derive(Debug, Clone)]
pub enum InteriorSource {
    Divergence(VectorField3D),
    Scalar(ScalarField3D),
}

impl InteriorSource {
    /// Volume integral of the source as a distribution; the divergence form
    /// integrates to its net upward boundary flux.
    pub fn integral(&self) -> f64 {
        match self {
            InteriorSource::Scalar(f) => f.integrate(),
            InteriorSource::Divergence(f) => {
                f.comp(3).trace(Boundary::Gamma1).mean() - f.comp(3).trace(Boundary::Gamma0).mean()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EllipticProblem {
    pub d: DCoefficients,
    pub source: InteriorSource,
    pub g0: ScalarField2D,
    pub g1: ScalarField2D,
    pub bc: BcKind,
}

/// Pressure field; Neumann solutions are gauge-fixed to zero interface mean.
#[derive(Debug, Clone)]
pub struct PressureField {
    pub q: ScalarField3D,
}

impl PressureField {
    pub fn interface_trace(&self) -> ScalarField2D {
        self.q.trace(Boundary::Gamma1)
    }
}

/// Convergence record of one elliptic solve.
#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub diffs: Vec<f64>,
    pub compat_residual: Option<f64>,
}

impl SolveStats {
    /// Largest successive-difference ratio after the first sweep.
    pub fn contraction_ratio(&self) -> Option<f64> {
        self.diffs
            .windows(2)
            .filter(|w| w[0] > 1e-300)
            .map(|w| w[1] / w[0])
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// Solvability residual: volume source minus net upward boundary flux.
pub fn check_compatibility(source: &InteriorSource, g0: &ScalarField2D, g1: &ScalarField2D) -> f64 {
    (source.integral() - (g1.mean() - g0.mean())).abs()
}

// ---------------------------------------------------------------------------
// interior right-hand sides

/// Divergence-form flux, row by row:
/// `f_j = (db/dt)_{ji} v_i - sum_{m<=2} b_{ji} v_m a_{km} dk v_i
///        - a_{ji} (v3 - psi_t) d3 v_i`.
pub fn interior_rhs_raw(v: &VectorField3D, map: &AleMap) -> VectorField3D {
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let grads: Vec<[ScalarField3D; 3]> = (1..=3)
        .map(|i| {
            let (d1, d2) = v.comp(i).grad_h();
            [d1, d2, v.comp(i).diff(3)]
        })
        .collect();

    // horizontal transport: adv_i = v1 (d1 + a31 d3) v_i + v2 (d2 + a32 d3) v_i
    let adv: Vec<ScalarField3D> = (0..3)
        .map(|i| {
            let mut t1 = grads[i][0].clone();
            t1.add_assign(&map.a31.mul(&grads[i][2]));
            let mut out = v1.mul(&t1);
            let mut t2 = grads[i][1].clone();
            t2.add_assign(&map.a32.mul(&grads[i][2]));
            out.add_assign(&v2.mul(&t2));
            out
        })
        .collect();

    // relative vertical transport: vert_i = (v3 - psi_t) d3 v_i
    let mut rel = v3.clone();
    rel.axpy(-1.0, &map.psi_t);
    let vert: Vec<ScalarField3D> = (0..3).map(|i| rel.mul(&grads[i][2])).collect();

    let mut f1 = map.j_t.mul(v1);
    f1.axpy(-1.0, &map.j.mul(&adv[0]));
    f1.axpy(-1.0, &vert[0]);

    let mut f2 = map.j_t.mul(v2);
    f2.axpy(-1.0, &map.j.mul(&adv[1]));
    f2.axpy(-1.0, &vert[1]);

    let mut f3 = map.psi_t_1.mul(v1);
    f3.scale(-1.0);
    f3.axpy(-1.0, &map.psi_t_2.mul(v2));
    f3.add_assign(&map.psi_1.mul(&adv[0]));
    f3.add_assign(&map.psi_2.mul(&adv[1]));
    f3.axpy(-1.0, &adv[2]);
    let mut avert = map.a31.mul(&vert[0]);
    avert.add_assign(&map.a32.mul(&vert[1]));
    avert.add_assign(&map.a33.mul(&vert[2]));
    f3.axpy(-1.0, &avert);

    let mut out = VectorField3D::new(f1, f2, f3);
    out.dealias();
    out
}

/// Contractions `C_k = dk(b_{ji}) d_j v_i` used by the scalar form.
fn coefficient_gradient_contractions(
    map: &AleMap,
    hdiv: &ScalarField3D,
    d3v1: &ScalarField3D,
    d3v2: &ScalarField3D,
) -> [ScalarField3D; 3] {
    let make = |dj: &ScalarField3D, dp1: &ScalarField3D, dp2: &ScalarField3D| {
        let mut c = dj.mul(hdiv);
        c.axpy(-1.0, &dp1.mul(d3v1));
        c.axpy(-1.0, &dp2.mul(d3v2));
        c
    };
    let c1 = make(&map.psi_13, &map.psi_11, &map.psi_12);
    let c2 = make(&map.psi_23, &map.psi_12, &map.psi_22);
    let c3 = make(&map.psi_33, &map.psi_13, &map.psi_23);
    [c1, c2, c3]
}

/// Scalar right-hand side in which all second velocity derivatives cancel.
pub fn interior_rhs_simplified(v: &VectorField3D, map: &AleMap) -> ScalarField3D {
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let grads: Vec<[ScalarField3D; 3]> = (1..=3)
        .map(|i| {
            let (d1, d2) = v.comp(i).grad_h();
            [d1, d2, v.comp(i).diff(3)]
        })
        .collect();
    let mut hdiv = grads[0][0].clone();
    hdiv.add_assign(&grads[1][1]);

    // coefficient-rate term: (db/dt)_{ji} d_j v_i
    let mut out = map.j_t.mul(&hdiv);
    out.axpy(-1.0, &map.psi_t_1.mul(&grads[0][2]));
    out.axpy(-1.0, &map.psi_t_2.mul(&grads[1][2]));

    // -B(v_m a_{.m}) : grad v for the two horizontal transport fields
    let sub_bgrad = |out: &mut ScalarField3D, field: &ScalarField3D, k: usize| {
        let b = ops::b_grad(map, field);
        for i in 0..3 {
            out.axpy(-1.0, &b[i].mul(&grads[i][k - 1]));
        }
    };
    sub_bgrad(&mut out, v1, 1);
    sub_bgrad(&mut out, v2, 2);
    let p13 = v1.mul(&map.a31);
    let p23 = v2.mul(&map.a32);
    sub_bgrad(&mut out, &p13, 3);
    sub_bgrad(&mut out, &p23, 3);

    // -B(h) : d3 v with h = a33 (v3 - psi_t)
    let mut rel = v3.clone();
    rel.axpy(-1.0, &map.psi_t);
    let h = map.a33.mul(&rel);
    sub_bgrad(&mut out, &h, 3);

    // + transported coefficient gradients
    let c = coefficient_gradient_contractions(map, &hdiv, &grads[0][2], &grads[1][2]);
    let mut u1 = c[0].clone();
    u1.add_assign(&map.a31.mul(&c[2]));
    out.add_assign(&v1.mul(&u1));
    let mut u2 = c[1].clone();
    u2.add_assign(&map.a32.mul(&c[2]));
    out.add_assign(&v2.mul(&u2));
    out.add_assign(&h.mul(&c[2]));

    out.dealiased()
}

/// Assemble the requested interior source form.
pub fn interior_rhs(v: &VectorField3D, map: &AleMap, form: RhsForm) -> InteriorSource {
    match form {
        RhsForm::Raw => InteriorSource::Divergence(interior_rhs_raw(v, map)),
        RhsForm::Simplified => InteriorSource::Scalar(interior_rhs_simplified(v, map)),
    }
}

// ---------------------------------------------------------------------------
// boundary data

/// Shared interface tail of the flux data:
/// `(db/dt)_{3i} v_i - (1/J)( sum_{j<=2} v_k b_{jk} dj w_t
///  + w_t d3(b_{3i}) v_i - v_k b_{jk} dj(b_{3i}) v_i )`, traced on the wall.
fn interface_flux_tail(v: &VectorField3D, map: &AleMap, w_t: &ScalarField2D) -> ScalarField2D {
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let top = |f: &ScalarField3D| f.trace(Boundary::Gamma1);

    // rate term
    let mut bt_v = map.psi_t_1.mul(v1);
    bt_v.scale(-1.0);
    bt_v.axpy(-1.0, &map.psi_t_2.mul(v2));
    let mut tail = top(&bt_v);

    // transport field U_j = v_k b_{jk}
    let u1 = map.j.mul(v1);
    let u2 = map.j.mul(v2);
    let mut u3 = map.psi_1.mul(v1);
    u3.scale(-1.0);
    u3.axpy(-1.0, &map.psi_2.mul(v2));
    u3.add_assign(v3);

    // W_j = dj(b_{3i}) v_i
    let w_of = |dp1: &ScalarField3D, dp2: &ScalarField3D| {
        let mut w = dp1.mul(v1);
        w.scale(-1.0);
        w.axpy(-1.0, &dp2.mul(v2));
        w
    };
    let w1 = w_of(&map.psi_11, &map.psi_12);
    let w2 = w_of(&map.psi_12, &map.psi_22);
    let w3 = w_of(&map.psi_13, &map.psi_23);

    let mut bracket = top(&u1).mul(&w_t.diff(1));
    bracket.add_assign(&top(&u2).mul(&w_t.diff(2)));
    bracket.add_assign(&w_t.mul(&top(&w3)));
    let mut uw = u1.mul(&w1);
    uw.add_assign(&u2.mul(&w2));
    uw.add_assign(&u3.mul(&w3));
    bracket.axpy(-1.0, &top(&uw));

    tail.axpy(-1.0, &top(&map.a33).mul(&bracket));
    tail
}

/// Robin interface and bottom flux data.
///
/// The simplified form uses the cancellation-friendly tail and exactly zero
/// bottom data; the raw form evaluates the advective fluxes directly on both
/// walls.
pub fn robin_boundary(
    v: &VectorField3D,
    map: &AleMap,
    state: &InterfaceState,
    nu: f64,
    form: RhsForm,
) -> (ScalarField2D, ScalarField2D) {
    let grid = state.grid().clone();
    let mut g1 = state.w.apply_multiplier(|ks| ks * ks);
    let mut damped = state.w_t.laplacian();
    damped.scale(nu);
    g1.axpy(-1.0, &damped);
    match form {
        RhsForm::Simplified => {
            g1.add_assign(&interface_flux_tail(v, map, &state.w_t));
            (ScalarField2D::zeros(&grid), g1)
        }
        RhsForm::Raw => {
            let (adv, top_rate) = raw_wall_fluxes(v, map);
            g1.add_assign(&top_rate);
            g1.add_assign(&adv.trace(Boundary::Gamma1));
            (adv.trace(Boundary::Gamma0), g1)
        }
    }
}

/// Advective wall flux `-b_{3i} v_m a_{jm} dj v_i - a_{3i}(v3 - psi_t) d3 v_i`
/// as a channel field, plus the rate term traced on the interface.
fn raw_wall_fluxes(v: &VectorField3D, map: &AleMap) -> (ScalarField3D, ScalarField2D) {
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let a1 = ops::a_grad(map, v1);
    let a2 = ops::a_grad(map, v2);
    let a3 = ops::a_grad(map, v3);
    // X_i = v1 A_1 v_i + v2 A_2 v_i
    let x = |g: &[ScalarField3D; 3]| {
        let mut t = v1.mul(&g[0]);
        t.add_assign(&v2.mul(&g[1]));
        t
    };
    let (x1, x2, x3) = (x(&a1), x(&a2), x(&a3));
    // b_{3i} X_i
    let mut bx = map.psi_1.mul(&x1);
    bx.scale(-1.0);
    bx.axpy(-1.0, &map.psi_2.mul(&x2));
    bx.add_assign(&x3);
    // a_{3i} (v3 - psi_t) d3 v_i
    let mut rel = v3.clone();
    rel.axpy(-1.0, &map.psi_t);
    let mut ay = map.a31.mul(&v1.diff(3));
    ay.add_assign(&map.a32.mul(&v2.diff(3)));
    ay.add_assign(&map.a33.mul(&v3.diff(3)));
    ay = ay.mul(&rel);
    let mut adv = bx;
    adv.scale(-1.0);
    adv.axpy(-1.0, &ay);

    let mut bt_v = map.psi_t_1.mul(v1);
    bt_v.scale(-1.0);
    bt_v.axpy(-1.0, &map.psi_t_2.mul(v2));
    (adv, bt_v.trace(Boundary::Gamma1))
}

/// Given-coefficient interface and bottom flux data; the plate acceleration
/// enters as explicit data.
pub fn neumann_boundary(
    v: &VectorField3D,
    map: &AleMap,
    w_tt: &ScalarField2D,
    state: &InterfaceState,
) -> (ScalarField2D, ScalarField2D) {
    let grid = state.grid().clone();
    let mut g1 = w_tt.clone();
    g1.scale(-1.0);
    g1.add_assign(&interface_flux_tail(v, map, &state.w_t));
    (ScalarField2D::zeros(&grid), g1)
}

/// Constant mean correction restoring the Neumann solvability identity.
///
/// Wall integrals arising from the divergence theorem are oriented: the
/// interface contributes with a plus sign and the bottom wall with a minus
/// sign; the final term lives on the bottom wall alone.
pub fn mean_correction(v: &VectorField3D, map: &AleMap) -> f64 {
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let d_ale = ops::cofactor_divergence(map, v);

    let oriented = |f: &ScalarField3D| f.trace(Boundary::Gamma1).mean() - f.trace(Boundary::Gamma0).mean();

    // row-3 contraction a_{3m} v_m
    let mut p3 = map.a31.mul(v1);
    p3.add_assign(&map.a32.mul(v2));
    p3.add_assign(&map.a33.mul(v3));

    // conservative divergence d_k (a_{km} v_m)
    let mut adiv = v1.diff(1);
    adiv.add_assign(&v2.diff(2));
    adiv.add_assign(&p3.diff(3));

    let h_psi = map.a33.mul(&map.psi_t);

    let e1 = adiv.mul(&d_ale).integrate();
    let e2 = -oriented(&p3.mul(&d_ale));
    let e3 = -h_psi.diff(3).mul(&d_ale).integrate();
    let e4 = oriented(&map.psi_t.mul(&map.a33).mul(&d_ale));

    // wall defect G = b_{3i} v_i - psi_t
    let mut g_def = ops::cofactor_normal_component(map, v);
    g_def.axpy(-1.0, &map.psi_t);

    // b_{3i} d3 v_i
    let mut bd3 = map.psi_1.mul(&v1.diff(3));
    bd3.scale(-1.0);
    bd3.axpy(-1.0, &map.psi_2.mul(&v2.diff(3)));
    bd3.add_assign(&v3.diff(3));
    let e5 = oriented(&map.a33.mul(&g_def).mul(&bd3));

    // horizontal transport of the defect along each wall
    let wall_e6 = |b: Boundary| {
        let g2 = g_def.trace(b);
        let mut t = v1.trace(b).mul(&g2.diff(1));
        t.add_assign(&v2.trace(b).mul(&g2.diff(2)));
        t.mean()
    };
    let e6 = wall_e6(Boundary::Gamma1) - wall_e6(Boundary::Gamma0);

    // d3(b_{3k}) v_k
    let mut w3 = map.psi_13.mul(v1);
    w3.scale(-1.0);
    w3.axpy(-1.0, &map.psi_23.mul(v2));
    let e7 = oriented(&map.a33.mul(&g_def).mul(&w3));

    // bottom-wall remainder: v_k a_{jk} dj(b_{3i}) v_i
    let w_of = |dp1: &ScalarField3D, dp2: &ScalarField3D| {
        let mut w = dp1.mul(v1);
        w.scale(-1.0);
        w.axpy(-1.0, &dp2.mul(v2));
        w
    };
    let w1 = w_of(&map.psi_11, &map.psi_12);
    let w2 = w_of(&map.psi_12, &map.psi_22);
    let mut e8_field = v1.mul(&w1);
    e8_field.add_assign(&v2.mul(&w2));
    e8_field.add_assign(&p3.mul(&w3));
    let e8 = e8_field.trace(Boundary::Gamma0).mean();

    e1 + e2 + e3 + e4 + e5 + e6 + e7 + e8
}

/// Full given-coefficient pressure problem with the mean correction folded
/// into the scalar source.
pub fn assemble_neumann_problem(
    v: &VectorField3D,
    map: &AleMap,
    w_tt: &ScalarField2D,
    state: &InterfaceState,
) -> EllipticProblem {
    let mut source = interior_rhs_simplified(v, map);
    let correction = mean_correction(v, map);
    source.data.mapv_inplace(|x| x + correction);
    let (g0, g1) = neumann_boundary(v, map, w_tt, state);
    EllipticProblem {
        d: DCoefficients::from_map(map),
        source: InteriorSource::Scalar(source),
        g0,
        g1,
        bc: BcKind::Neumann,
    }
}

/// Coupled-form pressure problem with the plate load folded into the
/// interface Robin data.
pub fn assemble_robin_problem(
    v: &VectorField3D,
    map: &AleMap,
    state: &InterfaceState,
    nu: f64,
    form: RhsForm,
) -> EllipticProblem {
    let source = interior_rhs(v, map, form);
    let (g0, g1) = robin_boundary(v, map, state, nu, form);
    EllipticProblem { d: DCoefficients::from_map(map), source, g0, g1, bc: BcKind::Robin }
}

// ---------------------------------------------------------------------------
// solver

pub struct EllipticSolver {
    grid: Arc<Grid>,
    bc: BcKind,
    /// Admissible coefficient deviation from the identity.
    pub eps0: f64,
    /// Gate on the Neumann solvability residual.
    pub compat_tol: f64,
    factors: Vec<LuFactors>,
    bordered: Option<LuFactors>,
}

impl EllipticSolver {
    pub fn new(grid: &Arc<Grid>, bc: BcKind) -> Self {
        let n3 = grid.n3;
        let top = n3 - 1;
        let mut factors = Vec::with_capacity(grid.horizontal_len());
        let mut bordered = None;
        for idx in 0..grid.horizontal_len() {
            let ks = spectral::ksq(grid, idx);
            if bc == BcKind::Neumann && ks == 0.0 {
                // singular mode: bordered system pinning the vertical mean
                let mut m = Array2::<f64>::zeros((n3 + 1, n3 + 1));
                for j in 0..n3 {
                    m[[0, j]] = grid.dmat[[0, j]];
                    m[[top, j]] = grid.dmat[[top, j]];
                    m[[n3, j]] = grid.weights[j];
                }
                for i in 1..top {
                    for j in 0..n3 {
                        m[[i, j]] = grid.dmat2[[i, j]];
                    }
                    m[[i, n3]] = -1.0;
                }
                bordered = Some(LuFactors::new(&m));
                factors.push(LuFactors::new(&Array2::eye(1)));
                continue;
            }
            let mut m = Array2::<f64>::zeros((n3, n3));
            for j in 0..n3 {
                m[[0, j]] = grid.dmat[[0, j]];
                m[[top, j]] = grid.dmat[[top, j]];
            }
            if bc == BcKind::Robin {
                m[[top, top]] += 1.0;
            }
            for i in 1..top {
                for j in 0..n3 {
                    m[[i, j]] = grid.dmat2[[i, j]];
                }
                m[[i, i]] -= ks;
            }
            factors.push(LuFactors::new(&m));
        }
        Self { grid: grid.clone(), bc, eps0: 0.25, compat_tol: 1e-8, factors, bordered }
    }

    /// One constant-coefficient sweep with spectral interior data and
    /// physical boundary data.
    fn base_solve(
        &self,
        rhs_spec: &Array3<Complex64>,
        g0: &ScalarField2D,
        g1: &ScalarField2D,
    ) -> ScalarField3D {
        let grid = &self.grid;
        let (n3, m) = (grid.n3, grid.horizontal_len());
        let top = n3 - 1;
        let g0s = spectral::fwd2(grid, &g0.data);
        let g1s = spectral::fwd2(grid, &g1.data);
        let mut sol = Array3::<Complex64>::default((n3, grid.n2, grid.n1));
        let rhs_flat = rhs_spec.as_slice().expect("contiguous");
        let sol_flat = sol.as_slice_mut().expect("contiguous");
        let mut pencil = vec![Complex64::default(); n3 + 1];
        for idx in 0..m {
            let ks = spectral::ksq(grid, idx);
            for i3 in 0..n3 {
                pencil[i3] = rhs_flat[i3 * m + idx];
            }
            pencil[0] = g0s[idx];
            pencil[top] = g1s[idx];
            if self.bc == BcKind::Neumann && ks == 0.0 {
                pencil[n3] = Complex64::default();
                self.bordered.as_ref().expect("bordered factor").solve_complex(&mut pencil);
            } else {
                self.factors[idx].solve_complex(&mut pencil[..n3]);
            }
            for i3 in 0..n3 {
                sol_flat[i3 * m + idx] = pencil[i3];
            }
        }
        ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &sol) }
    }

    /// Constant-coefficient channel solve with spectral interior data;
    /// useful on its own for flat potential problems.
    pub fn poisson(
        &self,
        rhs_spec: &Array3<Complex64>,
        g0: &ScalarField2D,
        g1: &ScalarField2D,
    ) -> ScalarField3D {
        self.base_solve(rhs_spec, g0, g1)
    }

    /// Lagged-perturbation iteration for the variable-coefficient problem.
    pub fn solve(
        &self,
        problem: &EllipticProblem,
        tol: f64,
        max_iter: usize,
        warm: Option<&PressureField>,
    ) -> Result<(PressureField, SolveStats)> {
        assert_eq!(problem.bc, self.bc, "problem and solver boundary kinds differ");
        let grid = &self.grid;
        let dev = problem.d.identity_deviation();
        if dev > self.eps0 {
            return Err(SolverError::NonConvergence { iterations: 0, residual: dev });
        }
        let mut stats = SolveStats::default();
        if self.bc == BcKind::Neumann {
            let r = check_compatibility(&problem.source, &problem.g0, &problem.g1);
            if r > self.compat_tol {
                return Err(SolverError::CompatibilityViolation { residual: r });
            }
            stats.compat_residual = Some(r);
        }

        let base_spec = match &problem.source {
            InteriorSource::Scalar(f) => spectral::fwd3(grid, &f.data),
            InteriorSource::Divergence(f) => divergence_spec(grid, f),
        };

        let mut q = match warm {
            Some(p) => p.q.clone(),
            None => ScalarField3D::zeros(grid),
        };
        for it in 1..=max_iter {
            let (p1, p2, p3) = perturbation_flux(&problem.d, &q);
            let mut rhs_spec = base_spec.clone();
            subtract_divergence(grid, &mut rhs_spec, &p1, &p2, &p3);
            spectral::apply_dealias(grid, &mut rhs_spec);
            let mut g0_eff = problem.g0.clone();
            g0_eff.axpy(-1.0, &p3.trace(Boundary::Gamma0));
            let mut g1_eff = problem.g1.clone();
            g1_eff.axpy(-1.0, &p3.trace(Boundary::Gamma1));
            let mut next = self.base_solve(&rhs_spec, &g0_eff, &g1_eff);
            if self.bc == BcKind::Neumann {
                let shift = next.trace(Boundary::Gamma1).mean();
                next = next.map(|v| v - shift);
            }
            let diff = next.sub(&q).max_abs();
            stats.diffs.push(diff);
            stats.iterations = it;
            q = next;
            if diff <= tol {
                // polish until the equation residual matches the iterate
                // tolerance too; the residual applies second derivatives to
                // the remaining iterate error, so a few extra contraction
                // sweeps are usually needed.
                let resid = self.equation_residual_spec(&base_spec, &problem.d, &q);
                let stagnated = stats
                    .diffs
                    .iter()
                    .rev()
                    .take(2)
                    .all(|&d| d <= tol.max(1e-14 * (1.0 + q.max_abs())))
                    && stats.diffs.len() >= 2
                    && diff >= 0.5 * stats.diffs[stats.diffs.len() - 2];
                if resid <= 10.0 * tol || stagnated {
                    log::trace!("elliptic solve converged in {it} sweeps (diff {diff:.3e}, residual {resid:.3e})");
                    return Ok((PressureField { q }, stats));
                }
            }
        }
        Err(SolverError::NonConvergence {
            iterations: max_iter,
            residual: *stats.diffs.last().unwrap_or(&f64::NAN),
        })
    }

    /// Residual of the variable-coefficient equation at interior nodes,
    /// measured with the same discrete operators the solver uses.
    pub fn equation_residual(&self, problem: &EllipticProblem, q: &PressureField) -> f64 {
        let grid = &self.grid;
        let base_spec = match &problem.source {
            InteriorSource::Scalar(f) => spectral::fwd3(grid, &f.data),
            InteriorSource::Divergence(f) => divergence_spec(grid, f),
        };
        self.equation_residual_spec(&base_spec, &problem.d, &q.q)
    }

    fn equation_residual_spec(
        &self,
        base_spec: &Array3<Complex64>,
        d: &DCoefficients,
        q: &ScalarField3D,
    ) -> f64 {
        let grid = &self.grid;
        let (f1, f2, f3) = full_flux(d, q);
        let mut resid = base_spec.clone();
        subtract_divergence(grid, &mut resid, &f1, &f2, &f3);
        spectral::apply_dealias(grid, &mut resid);
        let field = ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &resid) };
        let mut worst = 0.0f64;
        for i3 in 1..grid.n3 - 1 {
            for v in field.data.index_axis(ndarray::Axis(0), i3).iter() {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// One-shot convenience wrapper building the solver for the problem's kind.
pub fn solve_elliptic(
    problem: &EllipticProblem,
    tol: f64,
    max_iter: usize,
) -> Result<(PressureField, SolveStats)> {
    let grid = match &problem.source {
        InteriorSource::Scalar(f) => f.grid.clone(),
        InteriorSource::Divergence(f) => f.grid().clone(),
    };
    EllipticSolver::new(&grid, problem.bc).solve(problem, tol, max_iter, None)
}

/// `(d - I) grad q`, the lagged perturbation flux.
fn perturbation_flux(
    d: &DCoefficients,
    q: &ScalarField3D,
) -> (ScalarField3D, ScalarField3D, ScalarField3D) {
    let (q1, q2) = q.grad_h();
    let q3 = q.diff(3);
    let mut p1 = d.d11.map(|v| v - 1.0).mul(&q1);
    p1.add_assign(&d.d13.mul(&q3));
    let mut p2 = d.d22.map(|v| v - 1.0).mul(&q2);
    p2.add_assign(&d.d23.mul(&q3));
    let mut p3 = d.d13.mul(&q1);
    p3.add_assign(&d.d23.mul(&q2));
    p3.add_assign(&d.d33.map(|v| v - 1.0).mul(&q3));
    (p1, p2, p3)
}

/// `d grad q`, the full conormal flux.
fn full_flux(
    d: &DCoefficients,
    q: &ScalarField3D,
) -> (ScalarField3D, ScalarField3D, ScalarField3D) {
    let (q1, q2) = q.grad_h();
    let q3 = q.diff(3);
    let mut p1 = d.d11.mul(&q1);
    p1.add_assign(&d.d13.mul(&q3));
    let mut p2 = d.d22.mul(&q2);
    p2.add_assign(&d.d23.mul(&q3));
    let mut p3 = d.d13.mul(&q1);
    p3.add_assign(&d.d23.mul(&q2));
    p3.add_assign(&d.d33.mul(&q3));
    (p1, p2, p3)
}

/// Spectral divergence of a physical vector field.
fn divergence_spec(grid: &Arc<Grid>, f: &VectorField3D) -> Array3<Complex64> {
    let mut s1 = spectral::fwd3(grid, &f.comp(1).data);
    spectral::apply_deriv(grid, &mut s1, 1);
    let mut s2 = spectral::fwd3(grid, &f.comp(2).data);
    spectral::apply_deriv(grid, &mut s2, 2);
    let d3 = spectral::deriv_x3(grid, &f.comp(3).data);
    let s3 = spectral::fwd3(grid, &d3);
    for ((a, b), c) in s1.iter_mut().zip(s2.iter()).zip(s3.iter()) {
        *a += b + c;
    }
    s1
}

/// `rhs -= div (f1, f2, f3)`, assembled spectrally.
fn subtract_divergence(
    grid: &Arc<Grid>,
    rhs: &mut Array3<Complex64>,
    f1: &ScalarField3D,
    f2: &ScalarField3D,
    f3: &ScalarField3D,
) {
    let mut s1 = spectral::fwd3(grid, &f1.data);
    spectral::apply_deriv(grid, &mut s1, 1);
    let mut s2 = spectral::fwd3(grid, &f2.data);
    spectral::apply_deriv(grid, &mut s2, 2);
    let d3 = spectral::deriv_x3(grid, &f3.data);
    let s3 = spectral::fwd3(grid, &d3);
    for (((r, a), b), c) in rhs.iter_mut().zip(s1.iter()).zip(s2.iter()).zip(s3.iter()) {
        *r -= a + b + c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::build_map;
    use crate::fields::spectral::TWO_PI;
    use approx::assert_relative_eq;

    fn grid() -> Arc<Grid> {
        Grid::new(16, 16, 17)
    }

    fn rest_map(g: &Arc<Grid>) -> AleMap {
        build_map(&InterfaceState::rest(g)).unwrap()
    }

    fn identity_problem(
        g: &Arc<Grid>,
        source: InteriorSource,
        g0: ScalarField2D,
        g1: ScalarField2D,
        bc: BcKind,
    ) -> EllipticProblem {
        EllipticProblem { d: DCoefficients::from_map(&rest_map(g)), source, g0, g1, bc }
    }

    #[test]
    fn trivial_robin_problem_has_zero_solution() {
        let g = grid();
        let problem = identity_problem(
            &g,
            InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            ScalarField2D::zeros(&g),
            ScalarField2D::zeros(&g),
            BcKind::Robin,
        );
        let (q, stats) = solve_elliptic(&problem, 1e-10, 50).unwrap();
        assert!(q.q.max_abs() < 1e-13);
        assert!(stats.iterations <= 2);
    }

    #[test]
    fn robin_single_mode_matches_the_analytic_profile() {
        let g = grid();
        let g1 = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let problem = identity_problem(
            &g,
            InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            ScalarField2D::zeros(&g),
            g1,
            BcKind::Robin,
        );
        let (q, _) = solve_elliptic(&problem, 1e-12, 50).unwrap();
        let amp = 1.0 / (TWO_PI * TWO_PI.sinh() + TWO_PI.cosh());
        let exact = ScalarField3D::from_fn(&g, |x1, _, x3| {
            amp * (TWO_PI * x3).cosh() * (TWO_PI * x1).cos()
        });
        assert!(q.q.sub(&exact).max_abs() <= 1e-10);
    }

    #[test]
    fn neumann_single_mode_matches_the_analytic_profile() {
        let g = grid();
        let g1 = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let problem = identity_problem(
            &g,
            InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            ScalarField2D::zeros(&g),
            g1,
            BcKind::Neumann,
        );
        let (q, stats) = solve_elliptic(&problem, 1e-12, 50).unwrap();
        let amp = 1.0 / (TWO_PI * TWO_PI.sinh());
        let exact = ScalarField3D::from_fn(&g, |x1, _, x3| {
            amp * (TWO_PI * x3).cosh() * (TWO_PI * x1).cos()
        });
        assert!(q.q.sub(&exact).max_abs() <= 1e-10);
        assert!(stats.compat_residual.unwrap() <= 1e-12);
        assert!(q.interface_trace().mean().abs() <= 1e-13);
    }

    #[test]
    fn compatibility_examples() {
        let g = grid();
        let zero3 = InteriorSource::Scalar(ScalarField3D::zeros(&g));
        let zero2 = ScalarField2D::zeros(&g);
        assert_eq!(check_compatibility(&zero3, &zero2, &zero2), 0.0);
        let cosmode = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        assert!(check_compatibility(&zero3, &zero2, &cosmode) <= 1e-14);
        let ones = ScalarField2D::constant(&g, 1.0);
        assert_relative_eq!(check_compatibility(&zero3, &zero2, &ones), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn incompatible_neumann_data_are_rejected() {
        let g = grid();
        let problem = identity_problem(
            &g,
            InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            ScalarField2D::zeros(&g),
            ScalarField2D::constant(&g, 1.0),
            BcKind::Neumann,
        );
        match solve_elliptic(&problem, 1e-10, 50) {
            Err(SolverError::CompatibilityViolation { residual }) => {
                assert_relative_eq!(residual, 1.0, max_relative = 1e-12)
            }
            other => panic!("expected a compatibility violation, got {other:?}"),
        }
    }

    #[test]
    fn zero_velocity_sources_vanish() {
        let g = grid();
        let map = rest_map(&g);
        let v = VectorField3D::zeros(&g);
        assert!(interior_rhs_simplified(&v, &map).max_abs() < 1e-15);
        match interior_rhs(&v, &map, RhsForm::Raw) {
            InteriorSource::Divergence(f) => assert!(f.max_abs() < 1e-15),
            _ => unreachable!(),
        }
        assert_eq!(mean_correction(&v, &map), 0.0);
    }

    #[test]
    fn shear_flow_produces_no_source_on_the_rest_map() {
        let g = grid();
        let map = rest_map(&g);
        let u = ScalarField3D::from_fn(&g, |_, _, x3| (std::f64::consts::PI * x3).sin());
        let v = VectorField3D::new(u, ScalarField3D::zeros(&g), ScalarField3D::zeros(&g));
        assert!(interior_rhs_simplified(&v, &map).max_abs() <= 1e-11);
        let raw = interior_rhs_raw(&v, &map);
        assert!(raw.max_abs() <= 1e-11);
        assert!(mean_correction(&v, &map).abs() <= 1e-11);
        // boundary data vanish for shear over a resting interface
        let state = InterfaceState::rest(&g);
        let (g0, g1) = robin_boundary(&v, &map, &state, 0.0, RhsForm::Simplified);
        assert!(g0.max_abs() < 1e-15 && g1.max_abs() <= 1e-11);
        let (n0, n1) = neumann_boundary(&v, &map, &ScalarField2D::zeros(&g), &state);
        assert!(n0.max_abs() < 1e-15 && n1.max_abs() <= 1e-11);
    }

    #[test]
    fn crossed_modes_match_the_symbolic_divergence() {
        // On the rest map with v = (cos(2 pi x2), cos(2 pi x1), 0),
        // div(v . grad v) = 8 pi^2 sin(2 pi x1) sin(2 pi x2); the assembled
        // flux carries the opposite sign.
        let g = grid();
        let map = rest_map(&g);
        let v = VectorField3D::new(
            ScalarField3D::from_fn(&g, |_, x2, _| (TWO_PI * x2).cos()),
            ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).cos()),
            ScalarField3D::zeros(&g),
        );
        let raw = interior_rhs_raw(&v, &map);
        let div = {
            let mut d = raw.comp(1).diff(1);
            d.add_assign(&raw.comp(2).diff(2));
            d.add_assign(&raw.comp(3).diff(3));
            d
        };
        let mut worst = 0.0f64;
        for (i1, i2) in [(0, 3), (5, 1), (2, 9), (11, 7), (4, 4), (15, 10), (8, 2), (1, 13)] {
            let x1 = g.x1(i1);
            let x2 = g.x2(i2);
            let exact = -8.0 * std::f64::consts::PI.powi(2) * (TWO_PI * x1).sin() * (TWO_PI * x2).sin();
            let got = div.data[[3, i2, i1]];
            worst = worst.max((got - exact).abs());
        }
        assert!(worst <= 1e-10, "divergence mismatch {worst}");
    }

    #[test]
    fn plate_load_dominates_the_robin_data_for_still_fluid() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, _| 0.05 * (TWO_PI * x1).cos());
        let state = InterfaceState::new(w.clone(), ScalarField2D::zeros(&g), 0.0).unwrap();
        let map = build_map(&state).unwrap();
        let v = VectorField3D::zeros(&g);
        let (g0, g1) = robin_boundary(&v, &map, &state, 0.0, RhsForm::Simplified);
        assert!(g0.max_abs() < 1e-15);
        let expect = w.apply_multiplier(|ks| ks * ks);
        assert!(g1.sub(&expect).max_abs() <= 1e-10);
    }

    #[test]
    fn still_fluid_neumann_data_reduce_to_the_acceleration() {
        let g = grid();
        let state = InterfaceState::rest(&g);
        let map = rest_map(&g);
        let w_tt = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let (g0, g1) = neumann_boundary(&VectorField3D::zeros(&g), &map, &w_tt, &state);
        assert!(g0.max_abs() < 1e-15);
        let mut expect = w_tt;
        expect.scale(-1.0);
        assert!(g1.sub(&expect).max_abs() < 1e-13);
    }

    #[test]
    fn converged_solutions_satisfy_the_discrete_equation() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, x2| {
            0.01 * (TWO_PI * x1).cos() + 0.008 * (TWO_PI * (x1 + x2)).sin()
        });
        let state = InterfaceState::new(w, ScalarField2D::zeros(&g), 0.0).unwrap();
        let map = build_map(&state).unwrap();
        let g1 = ScalarField2D::from_fn(&g, |x1, x2| (TWO_PI * x1).cos() - 0.5 * (TWO_PI * x2).sin());
        let problem = EllipticProblem {
            d: DCoefficients::from_map(&map),
            source: InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            g0: ScalarField2D::zeros(&g),
            g1,
            bc: BcKind::Robin,
        };
        let tol = 1e-10;
        let solver = EllipticSolver::new(&g, BcKind::Robin);
        let (q, stats) = solver.solve(&problem, tol, 100, None).unwrap();
        assert!(solver.equation_residual(&problem, &q) <= 10.0 * tol);
        assert!(stats.contraction_ratio().unwrap() < 1.0);
    }

    #[test]
    fn robin_solutions_are_independent_of_the_starting_iterate() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, _| 0.02 * (TWO_PI * x1).cos());
        let state = InterfaceState::new(w, ScalarField2D::zeros(&g), 0.0).unwrap();
        let map = build_map(&state).unwrap();
        let g1 = ScalarField2D::from_fn(&g, |_, x2| (TWO_PI * x2).cos());
        let problem = EllipticProblem {
            d: DCoefficients::from_map(&map),
            source: InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            g0: ScalarField2D::zeros(&g),
            g1,
            bc: BcKind::Robin,
        };
        let solver = EllipticSolver::new(&g, BcKind::Robin);
        let tol = 1e-11;
        let (qa, _) = solver.solve(&problem, tol, 100, None).unwrap();
        let warm = PressureField { q: ScalarField3D::from_fn(&g, |x1, _, x3| 0.3 * (TWO_PI * x1).sin() * x3) };
        let (qb, _) = solver.solve(&problem, tol, 100, Some(&warm)).unwrap();
        assert!(qa.q.sub(&qb.q).max_abs() <= tol * 10.0);
    }

    #[test]
    fn neumann_gauge_is_fixed_by_normalization() {
        let g = grid();
        let w = ScalarField2D::from_fn(&g, |x1, _| 0.02 * (TWO_PI * x1).cos());
        let state = InterfaceState::new(w, ScalarField2D::zeros(&g), 0.0).unwrap();
        let map = build_map(&state).unwrap();
        let g1 = ScalarField2D::from_fn(&g, |x1, _| (TWO_PI * x1).cos());
        let problem = EllipticProblem {
            d: DCoefficients::from_map(&map),
            source: InteriorSource::Scalar(ScalarField3D::zeros(&g)),
            g0: ScalarField2D::zeros(&g),
            g1,
            bc: BcKind::Neumann,
        };
        let solver = EllipticSolver::new(&g, BcKind::Neumann);
        let tol = 1e-11;
        let (qa, _) = solver.solve(&problem, tol, 100, None).unwrap();
        let warm = PressureField { q: ScalarField3D::constant(&g, 7.0) };
        let (qb, _) = solver.solve(&problem, tol, 100, Some(&warm)).unwrap();
        assert!(qa.q.sub(&qb.q).max_abs() <= 1e-10);
        assert!(qa.interface_trace().mean().abs() <= 1e-12);
    }
}
