//! Horizontal Fourier transforms and derivative multipliers.
//!
//! Physical storage is row-major `(x3, x2, x1)`, so every horizontal plane is
//! one contiguous slice. Spectral buffers hold unnormalized forward
//! coefficients in the same layout; the inverse applies the `1/(n1*n2)`
//! factor. Mode `(k1, k2)` lives at index `i2 * n1 + i1` with the usual FFT
//! index-to-wavenumber map.

use super::grid::Grid;
use ndarray::{Array2, Array3};
use rustfft::num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Forward transform of one plane; `src` and `out` have length `n1 * n2`.
pub fn plane_fwd(grid: &Grid, src: &[f64], out: &mut [Complex64]) {
    debug_assert_eq!(src.len(), grid.horizontal_len());
    for (o, &v) in out.iter_mut().zip(src) {
        *o = Complex64::new(v, 0.0);
    }
    plane_fwd_complex(grid, out);
}

pub fn plane_fwd_complex(grid: &Grid, buf: &mut [Complex64]) {
    let (n1, n2) = (grid.n1, grid.n2);
    for row in buf.chunks_exact_mut(n1) {
        grid.fft_x1(true).process(row);
    }
    let mut col = vec![Complex64::default(); n2];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            col[i2] = buf[i2 * n1 + i1];
        }
        grid.fft_x2(true).process(&mut col);
        for i2 in 0..n2 {
            buf[i2 * n1 + i1] = col[i2];
        }
    }
}

/// Inverse transform in place, including normalization.
pub fn plane_inv(grid: &Grid, buf: &mut [Complex64]) {
    let (n1, n2) = (grid.n1, grid.n2);
    let mut col = vec![Complex64::default(); n2];
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            col[i2] = buf[i2 * n1 + i1];
        }
        grid.fft_x2(false).process(&mut col);
        for i2 in 0..n2 {
            buf[i2 * n1 + i1] = col[i2];
        }
    }
    for row in buf.chunks_exact_mut(n1) {
        grid.fft_x1(false).process(row);
    }
    let scale = 1.0 / (n1 * n2) as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Forward transform of a full field, plane by plane.
pub fn fwd3(grid: &Grid, field: &Array3<f64>) -> Array3<Complex64> {
    let (n3, n2, n1) = field.dim();
    let mut out = Array3::<Complex64>::default((n3, n2, n1));
    for i3 in 0..n3 {
        let src = field.as_slice().expect("contiguous field");
        let dst = out.as_slice_mut().expect("contiguous spectral buffer");
        let m = n1 * n2;
        plane_fwd(grid, &src[i3 * m..(i3 + 1) * m], &mut dst[i3 * m..(i3 + 1) * m]);
    }
    out
}

pub fn inv3(grid: &Grid, spec: &Array3<Complex64>) -> Array3<f64> {
    let (n3, n2, n1) = spec.dim();
    let mut out = Array3::<f64>::zeros((n3, n2, n1));
    let m = n1 * n2;
    let mut buf = grid.plane_buffer();
    let src = spec.as_slice().expect("contiguous spectral buffer");
    let dst = out.as_slice_mut().expect("contiguous field");
    for i3 in 0..n3 {
        buf.copy_from_slice(&src[i3 * m..(i3 + 1) * m]);
        plane_inv(grid, &mut buf);
        for (o, v) in dst[i3 * m..(i3 + 1) * m].iter_mut().zip(&buf) {
            *o = v.re;
        }
    }
    out
}

/// Multiply a spectral buffer by the horizontal derivative symbol for axis 1
/// or 2. Nyquist columns are zeroed to keep derivatives of real data real.
pub fn apply_deriv(grid: &Grid, spec: &mut Array3<Complex64>, axis: usize) {
    let (n3, n2, n1) = spec.dim();
    let m = n1 * n2;
    let buf = spec.as_slice_mut().expect("contiguous spectral buffer");
    for i3 in 0..n3 {
        apply_deriv_plane(grid, &mut buf[i3 * m..(i3 + 1) * m], axis);
    }
    let _ = (n3, n2);
}

pub fn apply_deriv_plane(grid: &Grid, buf: &mut [Complex64], axis: usize) {
    let (n1, n2) = (grid.n1, grid.n2);
    match axis {
        1 => {
            for i2 in 0..n2 {
                for i1 in 0..n1 {
                    let k = if i1 == n1 / 2 { 0 } else { grid.k1[i1] };
                    let sym = Complex64::new(0.0, TWO_PI * k as f64);
                    buf[i2 * n1 + i1] *= sym;
                }
            }
        }
        2 => {
            for i2 in 0..n2 {
                let k = if i2 == n2 / 2 { 0 } else { grid.k2[i2] };
                let sym = Complex64::new(0.0, TWO_PI * k as f64);
                for i1 in 0..n1 {
                    buf[i2 * n1 + i1] *= sym;
                }
            }
        }
        _ => panic!("horizontal derivative axis must be 1 or 2"),
    }
}

/// Zero every mode outside the 2/3-rule band, in place.
pub fn apply_dealias(grid: &Grid, spec: &mut Array3<Complex64>) {
    let (n3, _, _) = spec.dim();
    let m = grid.horizontal_len();
    let buf = spec.as_slice_mut().expect("contiguous spectral buffer");
    for i3 in 0..n3 {
        for (v, &keep) in buf[i3 * m..(i3 + 1) * m].iter_mut().zip(&grid.dealias_keep) {
            if !keep {
                *v = Complex64::default();
            }
        }
    }
}

pub fn apply_dealias_plane(grid: &Grid, buf: &mut [Complex64]) {
    for (v, &keep) in buf.iter_mut().zip(&grid.dealias_keep) {
        if !keep {
            *v = Complex64::default();
        }
    }
}

/// Vertical collocation derivative applied to the whole field as one
/// matrix-matrix product.
pub fn deriv_x3(grid: &Grid, field: &Array3<f64>) -> Array3<f64> {
    let (n3, n2, n1) = field.dim();
    let flat = field.view().into_shape((n3, n2 * n1)).expect("contiguous field");
    let out = grid.dmat.dot(&flat);
    out.into_shape((n3, n2, n1)).expect("shape preserved")
}

/// 2D plane helpers for interface fields stored as `(x2, x1)`.
pub fn fwd2(grid: &Grid, field: &Array2<f64>) -> Vec<Complex64> {
    let mut buf = grid.plane_buffer();
    plane_fwd(grid, field.as_slice().expect("contiguous plane"), &mut buf);
    buf
}

pub fn inv2(grid: &Grid, buf: &mut [Complex64]) -> Array2<f64> {
    plane_inv(grid, buf);
    let mut out = Array2::<f64>::zeros((grid.n2, grid.n1));
    for (o, v) in out.as_slice_mut().unwrap().iter_mut().zip(buf.iter()) {
        *o = v.re;
    }
    out
}

/// |2 pi k|^2 for the plane mode at flat index `idx`.
pub fn ksq(grid: &Grid, idx: usize) -> f64 {
    let i1 = idx % grid.n1;
    let i2 = idx / grid.n1;
    let q1 = grid.k1[i1] as f64;
    let q2 = grid.k2[i2] as f64;
    TWO_PI * TWO_PI * (q1 * q1 + q2 * q2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::Grid;

    #[test]
    fn round_trip_is_exact_for_band_limited_data() {
        let g = Grid::new(16, 8, 9);
        let mut plane = vec![0.0; g.horizontal_len()];
        for i2 in 0..g.n2 {
            for i1 in 0..g.n1 {
                plane[i2 * g.n1 + i1] = 1.5 + (TWO_PI * 3.0 * g.x1(i1)).cos()
                    - 0.25 * (TWO_PI * (2.0 * g.x2(i2) + g.x1(i1))).sin();
            }
        }
        let mut buf = g.plane_buffer();
        plane_fwd(&g, &plane, &mut buf);
        let back = inv2(&g, &mut buf);
        for (a, b) in plane.iter().zip(back.as_slice().unwrap()) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn derivative_symbol_matches_single_mode() {
        let g = Grid::new(16, 16, 9);
        let mut plane = vec![0.0; g.horizontal_len()];
        for i2 in 0..g.n2 {
            for i1 in 0..g.n1 {
                plane[i2 * g.n1 + i1] = (TWO_PI * g.x1(i1)).cos();
            }
        }
        let mut buf = g.plane_buffer();
        plane_fwd(&g, &plane, &mut buf);
        apply_deriv_plane(&g, &mut buf, 1);
        let d = inv2(&g, &mut buf);
        for i2 in 0..g.n2 {
            for i1 in 0..g.n1 {
                let exact = -TWO_PI * (TWO_PI * g.x1(i1)).sin();
                assert!((d[[i2, i1]] - exact).abs() < 1e-12 * TWO_PI);
            }
        }
    }
}
