//! Small dense LU factorization with partial pivoting.
//!
//! The vertical collocation systems are at most a few dozen unknowns, so a
//! self-contained factorization beats pulling in a LAPACK binding. Matrices
//! are real; right-hand sides may be complex and are solved component-wise.

use ndarray::Array2;
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<f64>,
    piv: Vec<usize>,
    n: usize,
}

impl LuFactors {
    /// Factor a square matrix. Panics on a numerically singular pivot since
    /// every system assembled in this crate is nonsingular by construction.
    pub fn new(a: &Array2<f64>) -> Self {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU requires a square matrix");
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for col in 0..n {
            let mut p = col;
            let mut best = lu[[col, col]].abs();
            for r in col + 1..n {
                let v = lu[[r, col]].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            assert!(best > 0.0, "singular matrix in LU factorization (column {col})");
            piv.push(p);
            if p != col {
                for c in 0..n {
                    let t = lu[[col, c]];
                    lu[[col, c]] = lu[[p, c]];
                    lu[[p, c]] = t;
                }
            }
            let d = lu[[col, col]];
            for r in col + 1..n {
                let m = lu[[r, col]] / d;
                lu[[r, col]] = m;
                if m != 0.0 {
                    for c in col + 1..n {
                        lu[[r, c]] -= m * lu[[col, c]];
                    }
                }
            }
        }
        Self { lu, piv, n }
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        for col in 0..self.n {
            rhs.swap(col, self.piv[col]);
        }
        for col in 0..self.n {
            let x = rhs[col];
            if x != 0.0 {
                for r in col + 1..self.n {
                    rhs[r] -= self.lu[[r, col]] * x;
                }
            }
        }
        for col in (0..self.n).rev() {
            rhs[col] /= self.lu[[col, col]];
            let x = rhs[col];
            if x != 0.0 {
                for r in 0..col {
                    rhs[r] -= self.lu[[r, col]] * x;
                }
            }
        }
    }

    pub fn solve_complex(&self, rhs: &mut [Complex64]) {
        let mut re: Vec<f64> = rhs.iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = rhs.iter().map(|z| z.im).collect();
        self.solve(&mut re);
        self.solve(&mut im);
        for (z, (r, i)) in rhs.iter_mut().zip(re.into_iter().zip(im)) {
            *z = Complex64::new(r, i);
        }
    }
}
