use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One Fourier mode `c cos(2 pi (m x1 + n x2)) + s sin(2 pi (m x1 + n x2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub m: i32,
    pub n: i32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `Z^2`-periodic trigonometric polynomial, used for `B_det` and `V`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BackgroundField {
    #[serde(default)]
    pub mean: f64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

/// `int_a^b exp(i k s) ds`, written around the midpoint for accuracy.
fn exp_integral(k: f64, a: f64, b: f64) -> Complex64 {
    let w = b - a;
    if k == 0.0 {
        return Complex64::new(w, 0.0);
    }
    let c = 0.5 * (a + b);
    Complex64::from_polar(2.0 * (0.5 * k * w).sin() / k, k * c)
}

impl BackgroundField {
    pub fn constant(v: f64) -> Self {
        BackgroundField {
            mean: v,
            terms: vec![],
        }
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64, Complex64)> + '_ {
        // coefficient of exp(i phase) whose real part is the term
        self.terms.iter().map(|t| {
            (
                2.0 * PI * t.m as f64,
                2.0 * PI * t.n as f64,
                Complex64::new(t.cos, -t.sin),
            )
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        self.mean
            + self
                .modes()
                .map(|(km, kn, c)| (c * Complex64::cis(km * x[0] + kn * x[1])).re)
                .sum::<f64>()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (km, kn, c) in self.modes() {
            let d = (c * Complex64::i() * Complex64::cis(km * x[0] + kn * x[1])).re;
            g[0] += km * d;
            g[1] += kn * d;
        }
        g
    }

    /// Second derivatives `[d11, d12, d22]`.
    pub fn hessian(&self, x: [f64; 2]) -> [f64; 3] {
        let mut h = [0.0; 3];
        for (km, kn, c) in self.modes() {
            let d = -(c * Complex64::cis(km * x[0] + kn * x[1])).re;
            h[0] += km * km * d;
            h[1] += km * kn * d;
            h[2] += kn * kn * d;
        }
        h
    }

    /// `int_a^b f(s, x2) ds`.
    pub fn row_integral(&self, x2: f64, a: f64, b: f64) -> f64 {
        self.mean * (b - a)
            + self
                .modes()
                .map(|(km, kn, c)| (c * exp_integral(km, a, b) * Complex64::cis(kn * x2)).re)
                .sum::<f64>()
    }

    /// `int_{x0}^{x1} int_{y0}^{y1} f`.
    pub fn rect_integral(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        self.mean * (x1 - x0) * (y1 - y0)
            + self
                .modes()
                .map(|(km, kn, c)| (c * exp_integral(km, x0, x1) * exp_integral(kn, y0, y1)).re)
                .sum::<f64>()
    }

    /// Crude bound `|mean| + sum |coefficients|` on the sup norm.
    pub fn abs_bound(&self) -> f64 {
        self.mean.abs() + self.terms.iter().map(|t| t.cos.abs() + t.sin.abs()).sum::<f64>()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| (t.cos == 0.0 && t.sin == 0.0) || (t.m == 0 && t.n == 0))
    }

    /// Min and max over one period cell on a `(n+1)^2` grid.
    pub fn range_on_grid(&self, n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let v = self.eval([i as f64 / n as f64, j as f64 / n as f64]);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn sample() -> BackgroundField {
        BackgroundField {
            mean: 4.5,
            terms: vec![
                TrigTerm { m: 1, n: 0, cos: 0.3, sin: -0.1 },
                TrigTerm { m: 2, n: -1, cos: 0.0, sin: 0.2 },
                TrigTerm { m: 0, n: 1, cos: 0.15, sin: 0.05 },
            ],
        }
    }

    #[test]
    fn integrals_match_quadrature() {
        let f = sample();
        let row = integrate(|s| f.eval([s, 0.37]), -0.4, 1.9, 1e-13);
        assert!((row - f.row_integral(0.37, -0.4, 1.9)).abs() < 1e-12);
        let rect = integrate(
            |y| integrate(|x| f.eval([x, y]), 0.2, 1.3, 1e-13),
            -0.7,
            0.6,
            1e-12,
        );
        assert!((rect - f.rect_integral(0.2, 1.3, -0.7, 0.6)).abs() < 1e-11);
    }

    #[test]
    fn derivatives_match_fd() {
        let f = sample();
        let x = [0.31, -0.77];
        let e = 1e-5;
        let g = f.gradient(x);
        let fd0 = (f.eval([x[0] + e, x[1]]) - f.eval([x[0] - e, x[1]])) / (2.0 * e);
        let fd1 = (f.eval([x[0], x[1] + e]) - f.eval([x[0], x[1] - e])) / (2.0 * e);
        assert!((g[0] - fd0).abs() < 1e-8 && (g[1] - fd1).abs() < 1e-8);
        let h = f.hessian(x);
        let fd01 = (f.gradient([x[0], x[1] + e])[0] - f.gradient([x[0], x[1] - e])[0]) / (2.0 * e);
        assert!((h[1] - fd01).abs() < 1e-7);
    }

    #[test]
    fn periodic_in_both_directions() {
        let f = sample();
        let x = [0.123, 0.456];
        assert!((f.eval(x) - f.eval([x[0] + 3.0, x[1] - 2.0])).abs() < 1e-12);
    }
}
