//! Discretization of the periodic channel T^2 x [0,1].
//!
//! Horizontal directions are uniform with Fourier transforms, the vertical
//! direction is a Chebyshev-Gauss-Lobatto collocation mapped to [0,1] with
//! node index 0 at the bottom wall and `n3 - 1` at the moving interface.

use crate::linalg::LuFactors;
use ndarray::Array2;
use rustfft::{num_complex::Complex64, Fft, FftPlanner};
use std::sync::Arc;

/// Fixed discretization of the channel. Shared immutably by every field.
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Vertical collocation nodes, ascending, x3[0] = 0 and x3[n3-1] = 1.
    pub x3: Vec<f64>,
    /// First-derivative collocation matrix in x3.
    pub dmat: Array2<f64>,
    /// Second-derivative collocation matrix in x3.
    pub dmat2: Array2<f64>,
    /// Quadrature weights on [0,1] matching `x3`.
    pub weights: Vec<f64>,
    /// Signed integer wavenumbers per horizontal index.
    pub k1: Vec<i64>,
    pub k2: Vec<i64>,
    /// True for mode pairs kept by the 2/3-rule truncation.
    pub dealias_keep: Vec<bool>,
    fft1_fwd: Arc<dyn Fft<f64>>,
    fft1_inv: Arc<dyn Fft<f64>>,
    fft2_fwd: Arc<dyn Fft<f64>>,
    fft2_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid({}x{}x{})", self.n1, self.n2, self.n3)
    }
}

impl Grid {
    /// Build a grid with `n1 x n2` horizontal points (both even, >= 8) and
    /// `n3 >= 9` vertical collocation nodes.
    pub fn new(n1: usize, n2: usize, n3: usize) -> Arc<Grid> {
        assert!(n1 >= 8 && n1 % 2 == 0, "n1 must be even and at least 8");
        assert!(n2 >= 8 && n2 % 2 == 0, "n2 must be even and at least 8");
        assert!(n3 >= 9, "n3 must be at least 9");

        let nv = n3 - 1;
        let x3: Vec<f64> = (0..n3)
            .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / nv as f64).cos()))
            .collect();
        let dmat = chebyshev_derivative_unit(n3);
        let dmat2 = dmat.dot(&dmat);
        let weights = clenshaw_curtis_unit(n3);

        let wavenumbers = |n: usize| -> Vec<i64> {
            (0..n).map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 }).collect()
        };
        let k1 = wavenumbers(n1);
        let k2 = wavenumbers(n2);
        let cut1 = (n1 / 3) as i64;
        let cut2 = (n2 / 3) as i64;
        let mut dealias_keep = vec![false; n1 * n2];
        for (i2, &q2) in k2.iter().enumerate() {
            for (i1, &q1) in k1.iter().enumerate() {
                dealias_keep[i2 * n1 + i1] = q1.abs() <= cut1 && q2.abs() <= cut2;
            }
        }

        let mut planner = FftPlanner::new();
        Arc::new(Grid {
            n1,
            n2,
            n3,
            x3,
            dmat,
            dmat2,
            weights,
            k1,
            k2,
            dealias_keep,
            fft1_fwd: planner.plan_fft_forward(n1),
            fft1_inv: planner.plan_fft_inverse(n1),
            fft2_fwd: planner.plan_fft_forward(n2),
            fft2_inv: planner.plan_fft_inverse(n2),
        })
    }

    pub fn horizontal_len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    /// Uniform horizontal coordinates of sample index i along x1.
    pub fn x1(&self, i: usize) -> f64 {
        i as f64 / self.n1 as f64
    }

    pub fn x2(&self, i: usize) -> f64 {
        i as f64 / self.n2 as f64
    }

    /// 2/3-rule cutoffs per direction.
    pub fn dealias_cut(&self) -> (i64, i64) {
        ((self.n1 / 3) as i64, (self.n2 / 3) as i64)
    }

    pub(crate) fn fft_x1(&self, fwd: bool) -> &Arc<dyn Fft<f64>> {
        if fwd { &self.fft1_fwd } else { &self.fft1_inv }
    }

    pub(crate) fn fft_x2(&self, fwd: bool) -> &Arc<dyn Fft<f64>> {
        if fwd { &self.fft2_fwd } else { &self.fft2_inv }
    }

    /// Scratch buffer sized for one horizontal plane.
    pub(crate) fn plane_buffer(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.horizontal_len()]
    }
}

/// Collocation derivative matrix on the ascending nodes of [0,1].
fn chebyshev_derivative_unit(n3: usize) -> Array2<f64> {
    let n = n3 - 1;
    // Standard Gauss-Lobatto matrix on t = cos(pi j / n), then the chain rule
    // for x = (1 - t)/2 gives d/dx = -2 d/dt.
    let t: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let c = |i: usize| -> f64 {
        let e = if i == 0 || i == n { 2.0 } else { 1.0 };
        e * if i % 2 == 0 { 1.0 } else { -1.0 }
    };
    let mut d = Array2::<f64>::zeros((n3, n3));
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (t[i] - t[j]);
                d[[i, j]] = v;
                row_sum += v;
            }
        }
        d[[i, i]] = -row_sum;
    }
    d.mapv_into(|v| -2.0 * v)
}

/// Clenshaw-Curtis weights on [0,1], exact for polynomials up to the
/// collocation degree. Obtained by matching Chebyshev moments.
fn clenshaw_curtis_unit(n3: usize) -> Vec<f64> {
    let n = n3 - 1;
    let mut a = Array2::<f64>::zeros((n3, n3));
    let mut rhs = vec![0.0; n3];
    for k in 0..n3 {
        for j in 0..n3 {
            a[[k, j]] = (std::f64::consts::PI * (k * j) as f64 / n as f64).cos();
        }
        // integral of T_k over [-1,1]
        rhs[k] = if k % 2 == 0 { 2.0 / (1.0 - (k * k) as f64) } else { 0.0 };
    }
    let lu = LuFactors::new(&a.t().to_owned());
    lu.solve(&mut rhs);
    // scale to [0,1]; node order reversal is immaterial since weights are
    // symmetric in j <-> n-j.
    rhs.iter().map(|w| 0.5 * w).collect()
}
