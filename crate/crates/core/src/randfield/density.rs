use rand::RngExt;
use serde::{Deserialize, Serialize};

/// Symmetric polynomial density `c_p (1 - s^2)^p` on `[-1, 1]`.
///
/// Scaled by the level width it gives the single-site law of the
/// coefficients. It is `C^{p-1}`, has zero mean for every `p`, and near the
/// lower edge `P(omega <= -1 + h)` behaves like `h^{p+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub power: u32,
}

impl Default for DensitySpec {
    fn default() -> Self {
        DensitySpec { power: 3 }
    }
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl DensitySpec {
    pub fn new(power: u32) -> Self {
        DensitySpec { power }
    }

    /// Normalization `c_p = (2p+1)! / (2^{2p+1} (p!)^2)`.
    pub fn norm(&self) -> f64 {
        let p = self.power;
        let mut c = 0.5;
        for i in 1..=p {
            // ratio c_i / c_{i-1} = (2i+1)(2i) / (4 i^2)
            c *= (2 * i + 1) as f64 * (2 * i) as f64 / (4.0 * (i * i) as f64);
        }
        c
    }

    /// Largest exponent `tau` in `nu(h) <= c h^tau`.
    pub fn tail_exponent(&self) -> u32 {
        self.power + 1
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            0.0
        } else {
            self.norm() * (1.0 - s * s).powi(self.power as i32)
        }
    }

    pub fn pdf_d2(&self, s: f64) -> f64 {
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let p = self.power as f64;
        let q = 1.0 - s * s;
        let c = self.norm();
        if self.power == 0 {
            0.0
        } else if self.power == 1 {
            -2.0 * c
        } else {
            c * (4.0 * p * (p - 1.0) * s * s * q.powi(self.power as i32 - 2)
                - 2.0 * p * q.powi(self.power as i32 - 1))
        }
    }

    /// Lower-tail mass `nu(h) = P(s <= -1 + h)` for the unit density.
    pub fn nu(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        if h >= 2.0 {
            return 1.0;
        }
        if h > 1.0 {
            return 1.0 - self.nu(2.0 - h);
        }
        // (1 - s^2)^p = t^p (2 - t)^p with t = s + 1
        let p = self.power;
        let mut acc = 0.0;
        for j in 0..=p {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let e = p + j + 1;
            acc += sign * binom(p, j) * 2f64.powi((p - j) as i32) * h.powi(e as i32) / e as f64;
        }
        self.norm() * acc
    }

    pub fn cdf(&self, s: f64) -> f64 {
        self.nu(s + 1.0)
    }

    /// `sup_h nu(h) / h^tau` for `tau <= p + 1`.
    pub fn tail_constant(&self, tau: f64) -> f64 {
        let n = 20000;
        (1..=n)
            .map(|i| {
                let h = 2.0 * i as f64 / n as f64;
                self.nu(h) / h.powf(tau)
            })
            .fold(0.0, f64::max)
            .max(if (tau - self.tail_exponent() as f64).abs() < 1e-12 {
                self.norm() * 2f64.powi(self.power as i32) / (self.power + 1) as f64
            } else {
                0.0
            })
    }

    /// `int |v''|` of the unit density.
    pub fn second_derivative_l1(&self) -> f64 {
        crate::quad::integrate(|s| self.pdf_d2(s).abs(), -1.0, 1.0, 1e-12)
    }

    /// Inverse of the distribution function on `[-1, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return -1.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        if u > 0.5 {
            return -self.quantile(1.0 - u);
        }
        // solve nu(h) = u for h in [0, 1]
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut h = (u / self.nu(1.0)).powf(1.0 / (self.power + 1) as f64).min(1.0);
        for _ in 0..200 {
            let f = self.nu(h) - u;
            if f > 0.0 {
                hi = h;
            } else {
                lo = h;
            }
            let d = self.pdf(h - 1.0);
            let mut next = if d > 0.0 { h - f / d } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - h).abs() <= 1e-16 * h.max(1e-300) || hi - lo < 1e-300 {
                h = next;
                break;
            }
            h = next;
        }
        h - 1.0
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }
}
