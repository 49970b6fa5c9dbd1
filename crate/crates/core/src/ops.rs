//! Differential operators weighted by the channel-map coefficients.

use crate::ale::AleMap;
use crate::fields::scalar::ScalarField3D;
use crate::fields::vector::VectorField3D;

/// Column contractions of the cofactor matrix with a gradient:
/// `B_1 f = J d1 f - d1psi d3 f`, `B_2 f = J d2 f - d2psi d3 f`, `B_3 f = d3 f`.
pub fn b_grad(map: &AleMap, f: &ScalarField3D) -> [ScalarField3D; 3] {
    let (f1, f2) = f.grad_h();
    let f3 = f.diff(3);
    let mut c1 = map.j.mul(&f1);
    c1.axpy(-1.0, &map.psi_1.mul(&f3));
    let mut c2 = map.j.mul(&f2);
    c2.axpy(-1.0, &map.psi_2.mul(&f3));
    [c1, c2, f3]
}

/// Column contractions of the inverse-map matrix with a gradient:
/// `A_1 f = d1 f + a31 d3 f`, `A_2 f = d2 f + a32 d3 f`, `A_3 f = a33 d3 f`.
pub fn a_grad(map: &AleMap, f: &ScalarField3D) -> [ScalarField3D; 3] {
    let (f1, f2) = f.grad_h();
    let f3 = f.diff(3);
    let mut c1 = f1;
    c1.add_assign(&map.a31.mul(&f3));
    let mut c2 = f2;
    c2.add_assign(&map.a32.mul(&f3));
    let c3 = map.a33.mul(&f3);
    [c1, c2, c3]
}

/// Variable divergence in inverse-map form: `a_{ki} d_k v_i`.
pub fn ale_divergence(map: &AleMap, v: &VectorField3D) -> ScalarField3D {
    let a1 = a_grad(map, v.comp(1));
    let a2 = a_grad(map, v.comp(2));
    let a3 = a_grad(map, v.comp(3));
    let mut out = a1[0].clone();
    out.add_assign(&a2[1]);
    out.add_assign(&a3[2]);
    out
}

/// Variable divergence in cofactor form: `b_{ji} d_j v_i = J a_{ki} d_k v_i`.
pub fn cofactor_divergence(map: &AleMap, v: &VectorField3D) -> ScalarField3D {
    let (d1v1, _) = v.comp(1).grad_h();
    let (_, d2v2) = v.comp(2).grad_h();
    let d3v1 = v.comp(1).diff(3);
    let d3v2 = v.comp(2).diff(3);
    let d3v3 = v.comp(3).diff(3);
    let mut hdiv = d1v1;
    hdiv.add_assign(&d2v2);
    let mut out = map.j.mul(&hdiv);
    out.axpy(-1.0, &map.psi_1.mul(&d3v1));
    out.axpy(-1.0, &map.psi_2.mul(&d3v2));
    out.add_assign(&d3v3);
    out
}

/// Third cofactor row contracted with the velocity: `b_{3i} v_i`.
pub fn cofactor_normal_component(map: &AleMap, v: &VectorField3D) -> ScalarField3D {
    let mut out = map.psi_1.mul(v.comp(1));
    out.scale(-1.0);
    out.axpy(-1.0, &map.psi_2.mul(v.comp(2)));
    out.add_assign(v.comp(3));
    out
}

/// Variable curl in inverse-map form: `zeta_i = eps_{ijk} a_{mj} d_m v_k`.
pub fn curl_a(map: &AleMap, v: &VectorField3D) -> VectorField3D {
    let a1 = a_grad(map, v.comp(1));
    let a2 = a_grad(map, v.comp(2));
    let a3 = a_grad(map, v.comp(3));
    // zeta_1 = A_2 v3 - A_3 v2, zeta_2 = A_3 v1 - A_1 v3, zeta_3 = A_1 v2 - A_2 v1
    let z1 = a3[1].sub(&a2[2]);
    let z2 = a1[2].sub(&a3[0]);
    let z3 = a2[0].sub(&a1[1]);
    VectorField3D::new(z1, z2, z3)
}

/// Transport residual along the walls: `v1 b31 + v2 b32 + (v3 - psi_t) b33`;
/// vanishing traces make the walls characteristic.
pub fn wall_transport_flux(map: &AleMap, v: &VectorField3D) -> ScalarField3D {
    let mut out = cofactor_normal_component(map, v);
    out.axpy(-1.0, &map.psi_t);
    out
}
