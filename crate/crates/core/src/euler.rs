//! Velocity dynamics on the deforming channel: momentum balance, divergence
//! monitoring, transported vorticity, and velocity reconstruction from
//! vorticity, divergence, wall data, and the horizontal mean flows.

use crate::ale::AleMap;
use crate::error::{Result, SolverError};
use crate::fields::scalar::{Boundary, ScalarField2D, ScalarField3D};
use crate::fields::spectral;
use crate::fields::vector::VectorField3D;
use crate::fields::Grid;
use crate::linalg::LuFactors;
use crate::ops;
use crate::pressure::PressureField;
use ndarray::{Array2, Array3};
use rustfft::num_complex::Complex64;
use std::sync::Arc;

/// Velocity state with the two horizontal mean flows tracked explicitly;
/// they pin the kernel of the reconstruction problem.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub v: VectorField3D,
    pub mean_flow: [f64; 2],
    pub t: f64,
}

impl FluidState {
    pub fn new(v: VectorField3D, t: f64) -> Self {
        let mean_flow = [v.comp(1).integrate(), v.comp(2).integrate()];
        Self { v, mean_flow, t }
    }

    pub fn rest(grid: &Arc<Grid>) -> Self {
        Self { v: VectorField3D::zeros(grid), mean_flow: [0.0, 0.0], t: 0.0 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.v.grid()
    }
}

/// Transported vorticity in map-weighted form.
#[derive(Debug, Clone)]
pub struct VorticityState {
    pub zeta: VectorField3D,
}

/// Map-weighted curl of the velocity.
pub fn ale_vorticity(v: &VectorField3D, map: &AleMap) -> VorticityState {
    VorticityState { zeta: ops::curl_a(map, v) }
}

/// Sup-norm of the variable divergence `a_{ki} dk v_i`.
pub fn divergence_residual(v: &VectorField3D, map: &AleMap) -> f64 {
    ops::ale_divergence(map, v).max_abs()
}

/// Velocity tendency of the momentum balance, dealiased:
/// `dv_i/dt = -v1 A_1 v_i - v2 A_2 v_i - a33 (v3 - psi_t) d3 v_i - A_i q`.
pub fn momentum_rhs(v: &VectorField3D, q: &PressureField, map: &AleMap) -> Result<VectorField3D> {
    let min_j = map.min_j();
    if min_j <= 0.0 {
        return Err(SolverError::DegenerateJacobian { min_j });
    }
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let qg = ops::a_grad(map, &q.q);
    let mut rel = v3.mul(&map.a33);
    rel.axpy(-1.0, &map.a33.mul(&map.psi_t));
    let mut out = Vec::with_capacity(3);
    for i in 1..=3 {
        let g = ops::a_grad(map, v.comp(i));
        let d3 = v.comp(i).diff(3);
        let mut r = v1.mul(&g[0]);
        r.add_assign(&v2.mul(&g[1]));
        r.add_assign(&rel.mul(&d3));
        r.add_assign(&qg[i - 1]);
        r.scale(-1.0);
        out.push(r.dealiased());
    }
    let mut it = out.into_iter();
    Ok(VectorField3D::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
}

/// Vorticity tendency of the transport-stretching balance. The wall flux of
/// the transport field must vanish (characteristic walls); its residual is
/// checked against `bc_tol`.
pub fn vorticity_rhs(
    zeta: &VorticityState,
    v: &VectorField3D,
    map: &AleMap,
    bc_tol: f64,
) -> Result<VectorField3D> {
    let flux = ops::wall_transport_flux(map, v);
    let residual = flux
        .trace(Boundary::Gamma0)
        .max_abs()
        .max(flux.trace(Boundary::Gamma1).max_abs());
    if residual > bc_tol {
        return Err(SolverError::BoundaryInflow { residual });
    }
    let (v1, v2, v3) = (v.comp(1), v.comp(2), v.comp(3));
    let z = &zeta.zeta;
    let mut rel = v3.clone();
    rel.axpy(-1.0, &map.psi_t);
    let inv_j = &map.a33;
    let mut out = Vec::with_capacity(3);
    for i in 1..=3 {
        let bv = ops::b_grad(map, v.comp(i));
        let bz = ops::b_grad(map, z.comp(i));
        // stretching: zeta_k B_k v_i
        let mut r = z.comp(1).mul(&bv[0]);
        r.add_assign(&z.comp(2).mul(&bv[1]));
        r.add_assign(&z.comp(3).mul(&bv[2]));
        // advection: v1 B_1 zeta_i + v2 B_2 zeta_i + (v3 - psi_t) d3 zeta_i
        r.axpy(-1.0, &v1.mul(&bz[0]));
        r.axpy(-1.0, &v2.mul(&bz[1]));
        r.axpy(-1.0, &rel.mul(&bz[2]));
        out.push(r.mul(inv_j).dealiased());
    }
    let mut it = out.into_iter();
    Ok(VectorField3D::new(it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
}

// ---------------------------------------------------------------------------
// velocity reconstruction

/// Per-mode vertical solvers for the constant-coefficient reconstruction.
pub struct DivCurlSolver {
    grid: Arc<Grid>,
    /// Dirichlet problems for the vertical component.
    dirichlet: Vec<LuFactors>,
    /// Flux problems for the horizontal components (bordered at the mean
    /// mode, which is only determined up to a constant).
    neumann: Vec<LuFactors>,
    bordered: LuFactors,
    pub eps0: f64,
}

impl DivCurlSolver {
    pub fn new(grid: &Arc<Grid>) -> Self {
        let n3 = grid.n3;
        let top = n3 - 1;
        let mut dirichlet = Vec::with_capacity(grid.horizontal_len());
        let mut neumann = Vec::with_capacity(grid.horizontal_len());
        for idx in 0..grid.horizontal_len() {
            let ks = spectral::ksq(grid, idx);
            let mut md = Array2::<f64>::zeros((n3, n3));
            md[[0, 0]] = 1.0;
            md[[top, top]] = 1.0;
            for i in 1..top {
                for j in 0..n3 {
                    md[[i, j]] = grid.dmat2[[i, j]];
                }
                md[[i, i]] -= ks;
            }
            dirichlet.push(LuFactors::new(&md));
            if ks == 0.0 {
                neumann.push(LuFactors::new(&Array2::eye(1)));
            } else {
                let mut mn = Array2::<f64>::zeros((n3, n3));
                for j in 0..n3 {
                    mn[[0, j]] = grid.dmat[[0, j]];
                    mn[[top, j]] = grid.dmat[[top, j]];
                }
                for i in 1..top {
                    for j in 0..n3 {
                        mn[[i, j]] = grid.dmat2[[i, j]];
                    }
                    mn[[i, i]] -= ks;
                }
                neumann.push(LuFactors::new(&mn));
            }
        }
        let mut mb = Array2::<f64>::zeros((n3 + 1, n3 + 1));
        for j in 0..n3 {
            mb[[0, j]] = grid.dmat[[0, j]];
            mb[[top, j]] = grid.dmat[[top, j]];
            mb[[n3, j]] = grid.weights[j];
        }
        for i in 1..top {
            for j in 0..n3 {
                mb[[i, j]] = grid.dmat2[[i, j]];
            }
            mb[[i, n3]] = -1.0;
        }
        Self {
            grid: grid.clone(),
            dirichlet,
            neumann,
            bordered: LuFactors::new(&mb),
            eps0: 0.25,
        }
    }

    /// Solve `curl v = F`, `div v = g`, `v3 = h` on the walls; horizontal
    /// means are pinned afterwards by the caller.
    fn solve_constant(
        &self,
        f: &VectorField3D,
        g: &ScalarField3D,
        h0: &ScalarField2D,
        h1: &ScalarField2D,
    ) -> VectorField3D {
        let grid = &self.grid;
        let (n3, m) = (grid.n3, grid.horizontal_len());
        let top = n3 - 1;

        let f1s = spectral::fwd3(grid, &f.comp(1).data);
        let f2s = spectral::fwd3(grid, &f.comp(2).data);
        let f3s = spectral::fwd3(grid, &f.comp(3).data);
        let gs = spectral::fwd3(grid, &g.data);
        let df1s = spectral::fwd3(grid, &spectral::deriv_x3(grid, &f.comp(1).data));
        let df2s = spectral::fwd3(grid, &spectral::deriv_x3(grid, &f.comp(2).data));
        let dgs = spectral::fwd3(grid, &spectral::deriv_x3(grid, &g.data));
        let h0s = spectral::fwd2(grid, &h0.data);
        let h1s = spectral::fwd2(grid, &h1.data);

        let f1f = f1s.as_slice().unwrap();
        let f2f = f2s.as_slice().unwrap();
        let f3f = f3s.as_slice().unwrap();
        let gf = gs.as_slice().unwrap();
        let df1f = df1s.as_slice().unwrap();
        let df2f = df2s.as_slice().unwrap();
        let dgf = dgs.as_slice().unwrap();

        let mut s1 = Array3::<Complex64>::default((n3, grid.n2, grid.n1));
        let mut s2 = Array3::<Complex64>::default((n3, grid.n2, grid.n1));
        let mut s3 = Array3::<Complex64>::default((n3, grid.n2, grid.n1));
        {
            let s1f = s1.as_slice_mut().unwrap();
            let s2f = s2.as_slice_mut().unwrap();
            let s3f = s3.as_slice_mut().unwrap();
            let mut pencil = vec![Complex64::default(); n3 + 1];
            for idx in 0..m {
                let (i1, i2) = (idx % grid.n1, idx / grid.n1);
                let k1 = if i1 == grid.n1 / 2 { 0 } else { grid.k1[i1] };
                let k2 = if i2 == grid.n2 / 2 { 0 } else { grid.k2[i2] };
                let ik1 = Complex64::new(0.0, spectral::TWO_PI * k1 as f64);
                let ik2 = Complex64::new(0.0, spectral::TWO_PI * k2 as f64);
                let ks = spectral::ksq(grid, idx);

                // vertical component: Dirichlet data on both walls
                for i3 in 0..n3 {
                    let p = i3 * m + idx;
                    pencil[i3] = dgf[p] - ik1 * f2f[p] + ik2 * f1f[p];
                }
                pencil[0] = h0s[idx];
                pencil[top] = h1s[idx];
                self.dirichlet[idx].solve_complex(&mut pencil[..n3]);
                for i3 in 0..n3 {
                    s3f[i3 * m + idx] = pencil[i3];
                }
                let v3_bottom = h0s[idx];
                let v3_top = h1s[idx];

                // first horizontal component: flux data from the curl rows
                for i3 in 0..n3 {
                    let p = i3 * m + idx;
                    pencil[i3] = ik1 * gf[p] - ik2 * f3f[p] + df2f[p];
                }
                pencil[0] = f2f[idx] + ik1 * v3_bottom;
                pencil[top] = f2f[top * m + idx] + ik1 * v3_top;
                if ks == 0.0 {
                    pencil[n3] = Complex64::default();
                    self.bordered.solve_complex(&mut pencil);
                } else {
                    self.neumann[idx].solve_complex(&mut pencil[..n3]);
                }
                for i3 in 0..n3 {
                    s1f[i3 * m + idx] = pencil[i3];
                }

                // second horizontal component
                for i3 in 0..n3 {
                    let p = i3 * m + idx;
                    pencil[i3] = ik2 * gf[p] - df1f[p] + ik1 * f3f[p];
                }
                pencil[0] = ik2 * v3_bottom - f1f[idx];
                pencil[top] = ik2 * v3_top - f1f[top * m + idx];
                if ks == 0.0 {
                    pencil[n3] = Complex64::default();
                    self.bordered.solve_complex(&mut pencil);
                } else {
                    self.neumann[idx].solve_complex(&mut pencil[..n3]);
                }
                for i3 in 0..n3 {
                    s2f[i3 * m + idx] = pencil[i3];
                }
            }
        }
        VectorField3D::new(
            ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &s1) },
            ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &s2) },
            ScalarField3D { grid: grid.clone(), data: spectral::inv3(grid, &s3) },
        )
    }

    /// Reconstruct the velocity from the map-weighted vorticity, the
    /// interface velocity, and the horizontal mean flows, by lagging the
    /// coefficient perturbations around the flat channel problem.
    pub fn reconstruct(
        &self,
        zeta: &VorticityState,
        w_t: &ScalarField2D,
        mean_flow: Option<[f64; 2]>,
        map: &AleMap,
        tol: f64,
        max_iter: usize,
        warm: Option<&VectorField3D>,
    ) -> Result<VectorField3D> {
        let grid = &self.grid;
        let mean_flow = mean_flow.ok_or(SolverError::KernelUnderdetermined)?;
        let dev = map.b_deviation();
        if dev > self.eps0 {
            return Err(SolverError::NonConvergence { iterations: 0, residual: dev });
        }
        // weighted target curl
        let mut target = zeta.zeta.clone();
        for c in &mut target.components {
            *c = c.mul(&map.j);
        }
        let mut v = match warm {
            Some(w) => w.clone(),
            None => VectorField3D::zeros(grid),
        };
        for _it in 1..=max_iter {
            // lagged corrections: (flat - weighted) operators applied to v
            let curl_b = curl_weighted(map, &v);
            let curl_flat = curl_flat(&v);
            let mut f = target.clone();
            f.axpy(1.0, &curl_flat);
            f.axpy(-1.0, &curl_b);

            let div_b = ops::cofactor_divergence(map, &v);
            let mut g = flat_divergence(&v);
            g.axpy(-1.0, &div_b);

            // wall data: v3 = psi_t + (v3 - b_{3j} v_j)
            let defect = {
                let mut d = v.comp(3).clone();
                d.axpy(-1.0, &ops::cofactor_normal_component(map, &v));
                d
            };
            let mut h1 = w_t.clone();
            h1.add_assign(&defect.trace(Boundary::Gamma1));
            let h0 = defect.trace(Boundary::Gamma0);

            let mut next = self.solve_constant(&f, &g, &h0, &h1);
            let shift1 = mean_flow[0] - next.comp(1).integrate();
            let shift2 = mean_flow[1] - next.comp(2).integrate();
            next.comp_mut(1).data.mapv_inplace(|x| x + shift1);
            next.comp_mut(2).data.mapv_inplace(|x| x + shift2);

            let diff = next.sub(&v).max_abs();
            v = next;
            if diff <= tol {
                return Ok(v);
            }
        }
        Err(SolverError::NonConvergence { iterations: max_iter, residual: f64::NAN })
    }
}

/// Map-weighted curl using the cofactor columns.
fn curl_weighted(map: &AleMap, v: &VectorField3D) -> VectorField3D {
    let b1 = ops::b_grad(map, v.comp(1));
    let b2 = ops::b_grad(map, v.comp(2));
    let b3 = ops::b_grad(map, v.comp(3));
    VectorField3D::new(b3[1].sub(&b2[2]), b1[2].sub(&b3[0]), b2[0].sub(&b1[1]))
}

fn curl_flat(v: &VectorField3D) -> VectorField3D {
    let g1 = flat_grad(v.comp(1));
    let g2 = flat_grad(v.comp(2));
    let g3 = flat_grad(v.comp(3));
    VectorField3D::new(g3[1].sub(&g2[2]), g1[2].sub(&g3[0]), g2[0].sub(&g1[1]))
}

fn flat_grad(f: &ScalarField3D) -> [ScalarField3D; 3] {
    let (f1, f2) = f.grad_h();
    [f1, f2, f.diff(3)]
}

fn flat_divergence(v: &VectorField3D) -> ScalarField3D {
    let mut d = v.comp(1).diff(1);
    d.add_assign(&v.comp(2).diff(2));
    d.add_assign(&v.comp(3).diff(3));
    d
}

/// One-shot reconstruction wrapper.
pub fn div_curl_reconstruct(
    zeta: &VorticityState,
    w_t: &ScalarField2D,
    mean_flow: Option<[f64; 2]>,
    map: &AleMap,
    tol: f64,
) -> Result<VectorField3D> {
    DivCurlSolver::new(&map.grid).reconstruct(zeta, w_t, mean_flow, map, tol, 100, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ale::{build_map, InterfaceState};
    use crate::fields::spectral::TWO_PI;

    fn grid() -> Arc<Grid> {
        Grid::new(16, 16, 17)
    }

    fn rest_map(g: &Arc<Grid>) -> AleMap {
        build_map(&InterfaceState::rest(g)).unwrap()
    }

    fn shear(g: &Arc<Grid>) -> VectorField3D {
        VectorField3D::new(
            ScalarField3D::from_fn(g, |_, _, x3| x3 * x3 * (1.0 - x3)),
            ScalarField3D::zeros(g),
            ScalarField3D::zeros(g),
        )
    }

    #[test]
    fn momentum_examples() {
        let g = grid();
        let map = rest_map(&g);
        let zero_q = PressureField { q: ScalarField3D::zeros(&g) };
        let r = momentum_rhs(&VectorField3D::zeros(&g), &zero_q, &map).unwrap();
        assert!(r.max_abs() < 1e-15);

        let r = momentum_rhs(&shear(&g), &zero_q, &map).unwrap();
        assert!(r.max_abs() <= 1e-12, "steady shear should be steady: {}", r.max_abs());

        let q = PressureField { q: ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).cos()) };
        let r = momentum_rhs(&VectorField3D::zeros(&g), &q, &map).unwrap();
        let exact = ScalarField3D::from_fn(&g, |x1, _, _| TWO_PI * (TWO_PI * x1).sin());
        assert!(r.comp(1).sub(&exact).max_abs() <= 1e-11);
        assert!(r.comp(2).max_abs().max(r.comp(3).max_abs()) <= 1e-12);
    }

    #[test]
    fn divergence_examples() {
        let g = grid();
        let map = rest_map(&g);
        assert_eq!(divergence_residual(&VectorField3D::zeros(&g), &map), 0.0);
        let v = VectorField3D::new(
            ScalarField3D::from_fn(&g, |_, x2, _| (TWO_PI * x2).sin()),
            ScalarField3D::zeros(&g),
            ScalarField3D::zeros(&g),
        );
        assert!(divergence_residual(&v, &map) <= 1e-12);
        let v = VectorField3D::new(
            ScalarField3D::from_fn(&g, |x1, _, _| (TWO_PI * x1).sin()),
            ScalarField3D::zeros(&g),
            ScalarField3D::zeros(&g),
        );
        let r = divergence_residual(&v, &map);
        assert!((r - TWO_PI).abs() <= 1e-10 * TWO_PI);
    }

    #[test]
    fn vorticity_of_shear_and_gradients() {
        let g = grid();
        let map = rest_map(&g);
        let z = ale_vorticity(&shear(&g), &map);
        let exact = ScalarField3D::from_fn(&g, |_, _, x3| 2.0 * x3 - 3.0 * x3 * x3);
        assert!(z.zeta.comp(2).sub(&exact).max_abs() <= 1e-11);
        assert!(z.zeta.comp(1).max_abs().max(z.zeta.comp(3).max_abs()) <= 1e-12);

        // gradient fields are curl-free
        let phi = ScalarField3D::from_fn(&g, |x1, _, x3| (TWO_PI * x1).cos() * (x3 * x3 * x3 - x3));
        let (p1, p2) = phi.grad_h();
        let gradv = VectorField3D::new(p1, p2, phi.diff(3));
        let z = ale_vorticity(&gradv, &map);
        assert!(z.zeta.max_abs() <= 1e-10);

        let z = ale_vorticity(&VectorField3D::zeros(&g), &map);
        assert!(z.zeta.max_abs() < 1e-15);
    }

    #[test]
    fn vorticity_tendency_examples() {
        let g = grid();
        let map = rest_map(&g);
        let zero_z = VorticityState { zeta: VectorField3D::zeros(&g) };
        let r = vorticity_rhs(&zero_z, &shear(&g), &map, 1e-8).unwrap();
        assert!(r.max_abs() < 1e-14);

        let v = shear(&g);
        let z = ale_vorticity(&v, &map);
        let r = vorticity_rhs(&z, &v, &map, 1e-8).unwrap();
        assert!(r.max_abs() <= 1e-11, "shear vorticity should be steady: {}", r.max_abs());

        let any_z = VorticityState {
            zeta: VectorField3D::new(
                ScalarField3D::from_fn(&g, |x1, _, x3| (TWO_PI * x1).sin() * x3),
                ScalarField3D::zeros(&g),
                ScalarField3D::zeros(&g),
            ),
        };
        let r = vorticity_rhs(&any_z, &VectorField3D::zeros(&g), &map, 1e-8).unwrap();
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn inflow_data_are_rejected() {
        let g = grid();
        let map = rest_map(&g);
        let v = VectorField3D::new(
            ScalarField3D::zeros(&g),
            ScalarField3D::zeros(&g),
            ScalarField3D::constant(&g, 0.1),
        );
        let z = VorticityState { zeta: VectorField3D::zeros(&g) };
        match vorticity_rhs(&z, &v, &map, 1e-8) {
            Err(SolverError::BoundaryInflow { residual }) => assert!(residual > 0.05),
            other => panic!("expected inflow rejection, got {other:?}"),
        }
    }

    #[test]
    fn reconstruction_trivial_cases() {
        let g = grid();
        let map = rest_map(&g);
        let zero_z = VorticityState { zeta: VectorField3D::zeros(&g) };
        let w_t = ScalarField2D::zeros(&g);
        let v = div_curl_reconstruct(&zero_z, &w_t, Some([0.0, 0.0]), &map, 1e-12).unwrap();
        assert!(v.max_abs() <= 1e-12);
        let v = div_curl_reconstruct(&zero_z, &w_t, Some([0.4, -0.7]), &map, 1e-12).unwrap();
        let c1 = v.comp(1).map(|x| x - 0.4).max_abs();
        let c2 = v.comp(2).map(|x| x + 0.7).max_abs();
        assert!(c1.max(c2).max(v.comp(3).max_abs()) <= 1e-11);
        assert!(matches!(
            div_curl_reconstruct(&zero_z, &w_t, None, &map, 1e-12),
            Err(SolverError::KernelUnderdetermined)
        ));
    }

    /// Exactly weighted-divergence-free velocity with a prescribed wall flux:
    /// a flat curl pulled back through the map.
    pub fn pulled_back_field(g: &Arc<Grid>, map: &AleMap) -> VectorField3D {
        let chi = |x3: f64| x3 * x3 * (3.0 - 2.0 * x3); // 0 at bottom, 1 on top
        let phi2 = ScalarField3D::from_fn(g, |x1, x2, x3| {
            0.5 / TWO_PI * chi(x3) * (TWO_PI * x1).sin() + 0.2 / TWO_PI * chi(x3) * (TWO_PI * (x1 + x2)).sin()
        });
        let phi1 = ScalarField3D::from_fn(g, |_, x2, x3| {
            -0.3 / TWO_PI * chi(x3) * (TWO_PI * x2).sin()
        });
        // u = curl (phi1, phi2, 0)
        let u1 = phi2.diff(3).map(|x| -x);
        let u2 = phi1.diff(3);
        let mut u3 = phi2.diff(1);
        u3.axpy(-1.0, &phi1.diff(2));
        let inv_j = &map.a33;
        let v1 = u1.mul(inv_j);
        let v2 = u2.mul(inv_j);
        let mut v3 = map.psi_1.mul(&u1);
        v3.add_assign(&map.psi_2.mul(&u2));
        v3 = v3.mul(inv_j);
        v3.add_assign(&u3);
        VectorField3D::new(v1, v2, v3)
    }

    #[test]
    fn round_trip_reconstruction_on_a_deformed_map() {
        let g = Grid::new(16, 16, 33);
        let w = ScalarField2D::from_fn(&g, |x1, _| 0.015 * (TWO_PI * x1).cos());
        let state = InterfaceState::new(w, ScalarField2D::zeros(&g), 0.0).unwrap();
        let map = build_map(&state).unwrap();
        assert!(map.b_deviation() < 0.12 && map.b_deviation() > 0.05);
        let v_star = pulled_back_field(&g, &map);
        let zeta = ale_vorticity(&v_star, &map);
        let w_t = ops::cofactor_normal_component(&map, &v_star).trace(Boundary::Gamma1);
        let mean_flow = [v_star.comp(1).integrate(), v_star.comp(2).integrate()];
        let v = div_curl_reconstruct(&zeta, &w_t, Some(mean_flow), &map, 1e-11).unwrap();
        let err = v.sub(&v_star).max_abs();
        assert!(err <= 1e-8, "round-trip error {err}");
        // kinematic wall residual of the reconstruction
        let defect = {
            let mut d = ops::cofactor_normal_component(&map, &v).trace(Boundary::Gamma1);
            d.axpy(-1.0, &w_t);
            d.max_abs()
        };
        assert!(defect <= 1e-8);
    }
}
