use faer::{c64, Mat, Side};
use num_complex::Complex64;

use super::Csr;

/// Full eigendecomposition, eigenvalues ascending, eigenvectors as columns.
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<c64>,
}

impl DenseEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.nrows())
            .map(|i| {
                let z = self.vectors[(i, k)];
                Complex64::new(z.re, z.im)
            })
            .collect()
    }
}

pub fn to_dense(a: &Csr) -> Mat<c64> {
    let mut m = Mat::<c64>::zeros(a.dim, a.dim);
    for (r, c, v) in a.triplets() {
        m[(r, c)] = c64::new(v.re, v.im);
    }
    m
}

pub fn dense_eigen(a: &Csr) -> DenseEigen {
    let m = to_dense(a);
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .expect("Hermitian eigendecomposition failed");
    let s = e.S().column_vector();
    let values = (0..a.dim).map(|i| s[i].re).collect();
    DenseEigen {
        values,
        vectors: e.U().to_owned(),
    }
}

pub fn dense_eigenvalues(a: &Csr) -> Vec<f64> {
    let m = to_dense(a);
    let s = m
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("Hermitian eigenvalue computation failed");
    let mut v: Vec<f64> = s.iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Eigenvalues (ascending) and column eigenvectors of a small real symmetric matrix.
pub(crate) fn symmetric_tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, Mat<f64>) {
    let k = alpha.len();
    let mut t = Mat::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i + 1, i)] = beta[i];
            t[(i, i + 1)] = beta[i];
        }
    }
    let e = t
        .self_adjoint_eigen(Side::Lower)
        .expect("tridiagonal eigendecomposition failed");
    let s = e.S().column_vector();
    ((0..k).map(|i| s[i]).collect(), e.U().to_owned())
}
