//! Sparse, banded and dense Hermitian linear algebra.

mod band;
mod dense;
mod lanczos;
mod sparse;

pub use band::{BandLdl, HermitianBand};
pub use dense::{dense_eigen, dense_eigenvalues, DenseEigen};
pub use lanczos::Lanczos;
pub use sparse::Csr;

use num_complex::Complex64;

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(v: &mut [Complex64], s: f64) {
    for z in v {
        *z *= s;
    }
}
