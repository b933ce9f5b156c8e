use faer::Mat;
use num_complex::Complex64;
use rand::RngExt;

use super::dense::symmetric_tridiagonal_eigen;
use super::{axpy, dot, norm};

/// Hermitian Lanczos with full reorthogonalization.
pub struct Lanczos {
    pub dim: usize,
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    next: Option<Vec<Complex64>>,
}

impl Lanczos {
    /// Start from a seeded random unit vector.
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = crate::rng::seeded(seed);
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let s = 1.0 / norm(&v);
        super::scale(&mut v, s);
        Lanczos {
            dim,
            basis: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            next: Some(v),
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Extend the Krylov basis by one vector. Returns `false` once an invariant
    /// subspace has been reached or the space is exhausted.
    pub fn step(&mut self, op: &mut dyn FnMut(&[Complex64], &mut [Complex64])) -> bool {
        let v = match self.next.take() {
            Some(v) => v,
            None => return false,
        };
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        op(&v, &mut w);
        let a = dot(&v, &w).re;
        self.basis.push(v);
        self.alpha.push(a);
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let b = norm(&w);
        let scale = self.alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        if b <= 1e-13 * scale || self.basis.len() >= self.dim {
            self.beta.push(0.0);
            return false;
        }
        super::scale(&mut w, 1.0 / b);
        self.beta.push(b);
        self.next = Some(w);
        true
    }

    /// Ritz values (descending) with the matching eigenvectors of `T` as columns.
    pub fn ritz(&self) -> (Vec<f64>, Mat<f64>) {
        let k = self.alpha.len();
        let (vals, vecs) = symmetric_tridiagonal_eigen(&self.alpha, &self.beta[..k.saturating_sub(1)]);
        let order: Vec<usize> = (0..k).rev().collect();
        let v: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let m = Mat::<f64>::from_fn(k, k, |r, c| vecs[(r, order[c])]);
        (v, m)
    }

    /// Residual norm `|beta_k s_k|` of the Ritz pair with coefficient column `c`.
    pub fn residual_estimate(&self, s: &Mat<f64>, c: usize) -> f64 {
        let k = self.alpha.len();
        (self.beta[k - 1] * s[(k - 1, c)]).abs()
    }

    pub fn ritz_vector(&self, s: &Mat<f64>, c: usize) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, q) in self.basis.iter().enumerate() {
            axpy(Complex64::new(s[(j, c)], 0.0), q, &mut y);
        }
        let n = norm(&y);
        super::scale(&mut y, 1.0 / n);
        y
    }

    /// The unit vector that would extend the basis next, if any.
    pub fn pending(&self) -> Option<&[Complex64]> {
        self.next.as_deref()
    }

    pub fn last_beta(&self) -> f64 {
        *self.beta.last().unwrap_or(&0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_extreme_eigenvalues_of_diagonal() {
        let n = 200;
        let d: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        let mut lz = Lanczos::new(n, 1);
        let mut op = |x: &[Complex64], y: &mut [Complex64]| {
            for i in 0..n {
                y[i] = x[i] * d[i];
            }
        };
        for _ in 0..80 {
            if !lz.step(&mut op) {
                break;
            }
        }
        let (vals, _) = lz.ritz();
        assert!((vals[0] - 1.99).abs() < 1e-10);
    }
}
