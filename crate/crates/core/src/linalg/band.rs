use num_complex::Complex64;

use super::Csr;
use crate::error::{Error, Result};

/// Lower band of a Hermitian matrix: row `r` holds columns `r - bw ..= r`.
#[derive(Clone, Debug)]
pub struct HermitianBand {
    pub dim: usize,
    pub bw: usize,
    data: Vec<Complex64>,
}

impl HermitianBand {
    pub fn from_csr(a: &Csr) -> Self {
        let bw = a
            .triplets()
            .filter(|(r, c, _)| c < r)
            .map(|(r, c, _)| r - c)
            .max()
            .unwrap_or(0);
        let mut out = HermitianBand {
            dim: a.dim,
            bw,
            data: vec![Complex64::new(0.0, 0.0); a.dim * (bw + 1)],
        };
        for (r, c, v) in a.triplets() {
            if c <= r {
                let k = out.slot(r, c);
                out.data[k] = v;
            }
        }
        out
    }

    fn slot(&self, r: usize, c: usize) -> usize {
        r * (self.bw + 1) + (c + self.bw - r)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        if c > r {
            return self.get(c, r).conj();
        }
        if r - c > self.bw {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[self.slot(r, c)]
        }
    }
}

/// `A - shift = L D L^H` without pivoting (`L` unit lower band, `D` real).
#[derive(Clone, Debug)]
pub struct BandLdl {
    pub dim: usize,
    pub bw: usize,
    pub shift: f64,
    l: Vec<Complex64>,
    d: Vec<f64>,
}

impl BandLdl {
    pub fn factor(a: &HermitianBand, shift: f64) -> Result<Self> {
        let (n, bw) = (a.dim, a.bw);
        let w = bw + 1;
        let mut l = a.data.clone();
        let mut d = vec![0.0; n];
        let mut tmp = vec![Complex64::new(0.0, 0.0); w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let off = bw - (i - lo);
            // row i entries for columns lo..i live at l[i*w + off ..]
            for j in lo..i {
                let mut s = l[i * w + (j + bw - i)];
                let jl = j.saturating_sub(bw).max(lo);
                if jl < j {
                    let ri = &tmp[(jl + bw - i)..(j + bw - i)];
                    let rj = &l[j * w + (jl + bw - j)..j * w + bw];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (x, y) in ri.iter().zip(rj) {
                        acc += x * y.conj();
                    }
                    s -= acc;
                }
                tmp[j + bw - i] = s;
                l[i * w + (j + bw - i)] = s / d[j];
            }
            let mut di = a.data[i * w + bw].re - shift;
            for k in off..bw {
                di -= (tmp[k] * l[i * w + k].conj()).re;
            }
            if !di.is_finite() {
                return Err(Error::Invalid("non-finite pivot in band factorization".into()));
            }
            d[i] = di;
            l[i * w + bw] = Complex64::new(1.0, 0.0);
        }
        Ok(BandLdl { dim: n, bw, shift, l, d })
    }

    /// `(negative, zero-ish, positive)` pivot counts; `|d| <= tiny` counts as zero.
    pub fn inertia(&self, tiny: f64) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for &v in &self.d {
            if v.abs() <= tiny {
                c.1 += 1;
            } else if v < 0.0 {
                c.0 += 1;
            } else {
                c.2 += 1;
            }
        }
        c
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Solve `(A - shift) x = b` in place.
    pub fn solve(&self, x: &mut [Complex64]) {
        let (n, bw) = (self.dim, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            let mut acc = Complex64::new(0.0, 0.0);
            for (lik, xk) in row.iter().zip(&x[lo..i]) {
                acc += lik * xk;
            }
            x[i] -= acc;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let lo = i.saturating_sub(bw);
            let xi = x[i];
            let row = &self.l[i * w + (lo + bw - i)..i * w + bw];
            for (lik, xk) in row.iter().zip(&mut x[lo..i]) {
                *xk -= lik.conj() * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_eigenvalues;

    fn random_hermitian_band(n: usize, bw: usize, seed: u64) -> Csr {
        let mut rows = vec![Vec::new(); n];
        let mut s = seed;
        let mut next = || {
            s = crate::rng::splitmix64(s);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for r in 0..n {
            rows[r].push((r, Complex64::new(4.0 * next(), 0.0)));
            for c in r.saturating_sub(bw)..r {
                if next() > 0.0 {
                    let v = Complex64::new(next(), next());
                    rows[r].push((c, v));
                    rows[c].push((r, v.conj()));
                }
            }
        }
        Csr::from_rows(rows)
    }

    #[test]
    fn solve_inverts_and_inertia_counts() {
        let a = random_hermitian_band(60, 7, 3);
        let band = HermitianBand::from_csr(&a);
        let evals = dense_eigenvalues(&a);
        for shift in [-3.0, -0.7, 0.1, 1.3, 5.0] {
            let f = BandLdl::factor(&band, shift).unwrap();
            let (neg, zero, _) = f.inertia(1e-12);
            assert_eq!(zero, 0);
            assert_eq!(neg, evals.iter().filter(|&&e| e < shift).count(), "shift {shift}");
            let b: Vec<Complex64> = (0..60).map(|i| Complex64::new(i as f64, 1.0 - i as f64 * 0.1)).collect();
            let mut x = b.clone();
            f.solve(&mut x);
            let mut y = vec![Complex64::new(0.0, 0.0); 60];
            a.matvec(&x, &mut y);
            for i in 0..60 {
                let r = y[i] - shift * x[i] - b[i];
                assert!(r.norm() < 1e-8 * (1.0 + b[i].norm()), "{r}");
            }
        }
    }
}
