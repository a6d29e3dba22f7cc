//! Sparse symmetric positive-definite systems.

use nalgebra::{DMatrix, DVector};

/// Below this many unknowns the system is factorized densely.
pub const DENSE_LIMIT: usize = 500;

/// Symmetric matrix in row-compressed form, diagonal stored separately.
#[derive(Debug, Clone)]
pub struct SpdSystem {
    diag: Vec<f64>,
    /// Off-diagonal `(column, value)` entries per row, sorted by column.
    off: Vec<Vec<(usize, f64)>>,
}

impl SpdSystem {
    pub fn new(diag: Vec<f64>, off: Vec<Vec<(usize, f64)>>) -> Self {
        debug_assert_eq!(diag.len(), off.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.diag[i] * x[i];
            for &(j, a) in &self.off[i] {
                acc += a * x[j];
            }
            *o = acc;
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, a) in &self.off[i] {
                m[(i, j)] = a;
            }
        }
        m
    }

    /// Solves `A x = b`. Returns the solution and the number of CG iterations
    /// (zero for the dense path).
    pub fn solve(&self, b: &[f64]) -> (Vec<f64>, usize) {
        if self.is_empty() {
            return (Vec::new(), 0);
        }
        if self.len() < DENSE_LIMIT {
            if let Some(chol) = self.to_dense().cholesky() {
                let x = chol.solve(&DVector::from_column_slice(b));
                return (x.iter().copied().collect(), 0);
            }
        }
        self.conjugate_gradient(b, 1e-14, 20 * self.len() + 100)
    }

    /// Jacobi-preconditioned conjugate gradient, stopping when the residual
    /// norm falls below `rel_tol · ‖b‖`.
    pub fn conjugate_gradient(&self, b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
        let n = self.len();
        let inv_diag: Vec<f64> = self.diag.iter().map(|&d| 1.0 / d).collect();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let target = rel_tol * norm(b);
        if norm(&r) <= target {
            return (x, 0);
        }
        for it in 1..=max_iter {
            self.mul(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return (x, it);
            }
            let step = rz / pap;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            if norm(&r) <= target {
                return (x, it);
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        (x, max_iter)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
