use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which single-site profile the field is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// Flat top of height one on `|t| <= 1/2 - delta`, smooth ramp of width `2 delta`.
    Plateau,
    /// Rescaled bump `delta^2 u0(delta x)` spread over `|x|_inf <= 1/delta`.
    Mollifier,
}

/// Quintic smoothstep `6y^5 - 15y^4 + 10y^3`, clamped to `[0, 1]`.
pub fn smoothstep(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        y * y * y * (10.0 - 15.0 * y + 6.0 * y * y)
    }
}

fn smoothstep_d1(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        30.0 * y * y * (1.0 - y) * (1.0 - y)
    }
}

fn smoothstep_d2(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        60.0 * y * (1.0 - y) * (1.0 - 2.0 * y)
    }
}

/// `int_0^y smoothstep`, clamped so the value is `1/2` for `y >= 1`.
fn smoothstep_int(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        0.5
    } else {
        y.powi(4) * (2.5 - 3.0 * y + y * y)
    }
}

/// Single-site profile `u(x) = phi(x1) phi(x2)` with `int u = 1`.
///
/// The product structure gives closed forms for every column integral the
/// gauges need: `Phi(t) = int_{-inf}^t phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileFunction {
    pub kind: ProfileKind,
    pub delta: f64,
}

/// Default plateau ramp parameter.
pub const PLATEAU_DELTA0: f64 = 1.0 / 3200.0;
/// Relaxed upper limit for `delta` when the strict bound is waived.
pub const RELAXED_DELTA_MAX: f64 = 0.25;

/// Sup norm of `|grad u0|` for the mollifier base bump, found by grid search.
pub fn mollifier_grad_sup() -> f64 {
    // u0(x) = a(x1) a(x2), a(t) = S(1 - |t|); search the quarter cell.
    let n = 400;
    let mut best: f64 = 0.0;
    let mut arg = (0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let g = grad_u0_norm(x, y);
            if g > best {
                best = g;
                arg = (x, y);
            }
        }
    }
    let mut step = 1.0 / n as f64;
    for _ in 0..40 {
        let (cx, cy) = arg;
        for dx in [-1.0, 0.0, 1.0] {
            for dy in [-1.0, 0.0, 1.0] {
                let (x, y) = ((cx + dx * step).clamp(0.0, 1.0), (cy + dy * step).clamp(0.0, 1.0));
                let g = grad_u0_norm(x, y);
                if g > best {
                    best = g;
                    arg = (x, y);
                }
            }
        }
        step *= 0.5;
    }
    best
}

fn grad_u0_norm(x: f64, y: f64) -> f64 {
    let (ax, ay) = (smoothstep(1.0 - x), smoothstep(1.0 - y));
    let (dx, dy) = (smoothstep_d1(1.0 - x), smoothstep_d1(1.0 - y));
    ((dx * ay).powi(2) + (ax * dy).powi(2)).sqrt()
}

impl ProfileFunction {
    pub fn new(kind: ProfileKind, delta: f64) -> Result<Self> {
        let p = ProfileFunction { kind, delta };
        p.check(true)?;
        Ok(p)
    }

    pub fn plateau() -> Self {
        ProfileFunction {
            kind: ProfileKind::Plateau,
            delta: PLATEAU_DELTA0,
        }
    }

    /// Strict upper bound on `delta` for this kind.
    pub fn delta0(kind: ProfileKind) -> f64 {
        match kind {
            ProfileKind::Plateau => PLATEAU_DELTA0,
            ProfileKind::Mollifier => {
                let g = mollifier_grad_sup();
                1.0 / (640.0 + 32.0 * g * g)
            }
        }
    }

    pub fn check(&self, relaxed: bool) -> Result<()> {
        let d = self.delta;
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::param("profile.delta", "must be positive"));
        }
        if self.kind == ProfileKind::Plateau && d >= 0.5 {
            return Err(Error::param("profile.delta", "plateau ramp needs delta < 1/2"));
        }
        let limit = if relaxed {
            RELAXED_DELTA_MAX
        } else {
            Self::delta0(self.kind)
        };
        if d > limit * (1.0 + 1e-12) {
            return Err(Error::param(
                "profile.delta",
                format!("delta = {d} exceeds the admissible bound {limit}"),
            ));
        }
        Ok(())
    }

    /// Padding `c_delta` around a box so every site touching it is included.
    pub fn c_delta(&self) -> f64 {
        match self.kind {
            ProfileKind::Plateau => 1.5,
            ProfileKind::Mollifier => 1.0 / self.delta,
        }
    }

    /// Half-width of the support of the one-dimensional factor.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            ProfileKind::Plateau => 0.5 + self.delta,
            ProfileKind::Mollifier => 1.0 / self.delta,
        }
    }

    /// Bound on `|alpha_z|` in units of the site spacing.
    pub fn alpha_bound(&self) -> f64 {
        match self.kind {
            ProfileKind::Plateau => 1.0,
            ProfileKind::Mollifier => self.delta,
        }
    }

    pub fn factor(&self, t: f64) -> f64 {
        let d = self.delta;
        match self.kind {
            ProfileKind::Plateau => smoothstep((0.5 + d - t.abs()) / (2.0 * d)),
            ProfileKind::Mollifier => {
                let s = (d * t).abs();
                if s >= 1.0 {
                    0.0
                } else {
                    d * smoothstep(1.0 - s)
                }
            }
        }
    }

    pub fn factor_d1(&self, t: f64) -> f64 {
        let d = self.delta;
        match self.kind {
            ProfileKind::Plateau => {
                -t.signum() * smoothstep_d1((0.5 + d - t.abs()) / (2.0 * d)) / (2.0 * d)
            }
            ProfileKind::Mollifier => {
                let s = (d * t).abs();
                if s >= 1.0 {
                    0.0
                } else {
                    -t.signum() * d * d * smoothstep_d1(1.0 - s)
                }
            }
        }
    }

    pub fn factor_d2(&self, t: f64) -> f64 {
        let d = self.delta;
        match self.kind {
            ProfileKind::Plateau => smoothstep_d2((0.5 + d - t.abs()) / (2.0 * d)) / (4.0 * d * d),
            ProfileKind::Mollifier => {
                let s = (d * t).abs();
                if s >= 1.0 {
                    0.0
                } else {
                    d * d * d * smoothstep_d2(1.0 - s)
                }
            }
        }
    }

    /// `Phi(t) = int_{-inf}^t phi`, rising from 0 to 1.
    pub fn factor_int(&self, t: f64) -> f64 {
        let d = self.delta;
        match self.kind {
            ProfileKind::Plateau => {
                let a = t.abs();
                if a <= 0.5 - d {
                    0.5 + t
                } else {
                    let tail = 2.0 * d * smoothstep_int((0.5 + d - a) / (2.0 * d));
                    if t < 0.0 {
                        tail
                    } else {
                        1.0 - tail
                    }
                }
            }
            ProfileKind::Mollifier => {
                let s = d * t;
                if s <= -1.0 {
                    0.0
                } else if s >= 1.0 {
                    1.0
                } else if s <= 0.0 {
                    smoothstep_int(1.0 + s)
                } else {
                    1.0 - smoothstep_int(1.0 - s)
                }
            }
        }
    }

    /// `u(y)` at unit scale.
    pub fn eval(&self, y: [f64; 2]) -> f64 {
        self.factor(y[0]) * self.factor(y[1])
    }

    /// `sum_n phi(t - n)`, the one-dimensional factor of the profile sum `U`.
    pub fn periodic_sum(&self, t: f64) -> f64 {
        self.periodic_sum_with(t, |p, s| p.factor(s))
    }

    pub fn periodic_sum_d1(&self, t: f64) -> f64 {
        self.periodic_sum_with(t, |p, s| p.factor_d1(s))
    }

    pub fn periodic_sum_d2(&self, t: f64) -> f64 {
        self.periodic_sum_with(t, |p, s| p.factor_d2(s))
    }

    fn periodic_sum_with(&self, t: f64, f: impl Fn(&Self, f64) -> f64) -> f64 {
        let r = self.support_radius();
        let lo = (t - r).floor() as i64;
        let hi = (t + r).ceil() as i64;
        (lo..=hi).map(|n| f(self, t - n as f64)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn kinds() -> Vec<ProfileFunction> {
        vec![
            ProfileFunction { kind: ProfileKind::Plateau, delta: 0.1 },
            ProfileFunction { kind: ProfileKind::Plateau, delta: PLATEAU_DELTA0 },
            ProfileFunction { kind: ProfileKind::Mollifier, delta: 0.25 },
            ProfileFunction { kind: ProfileKind::Mollifier, delta: 0.1 },
        ]
    }

    #[test]
    fn factor_integrates_to_one_and_matches_antiderivative() {
        for p in kinds() {
            let r = p.support_radius();
            let total = integrate(|t| p.factor(t), -r - 1.0, r + 1.0, 1e-13);
            assert!((total - 1.0).abs() < 1e-10, "{p:?} {total}");
            for &t in &[-r - 0.5, -r * 0.7, -0.49, -0.1, 0.0, 0.3, 0.499, r * 0.9, r + 1.0] {
                let mut cuts = vec![-r - 1.0];
                for c in [-r, -(1.0 - p.delta).min(0.5 - p.delta), 0.0, 0.5 - p.delta, r] {
                    if c > cuts[cuts.len() - 1] && c < t {
                        cuts.push(c);
                    }
                }
                cuts.push(t);
                let v: f64 = cuts.windows(2).map(|w| integrate(|s| p.factor(s), w[0], w[1], 1e-15)).sum();
                assert!((v - p.factor_int(t)).abs() < 1e-10, "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for p in kinds() {
            let r = p.support_radius();
            let s = 1e-6 * r.min(1.0) * p.delta.min(1.0);
            for i in 1..50 {
                let t = -r + 2.0 * r * i as f64 / 50.0 + 1e-3 * p.delta;
                let fd1 = (p.factor(t + s) - p.factor(t - s)) / (2.0 * s);
                let scale1 = 1.0 + p.factor_d1(t).abs();
                assert!((fd1 - p.factor_d1(t)).abs() < 1e-4 * scale1 / p.delta, "{p:?} t={t}");
                let fd2 = (p.factor_d1(t + s) - p.factor_d1(t - s)) / (2.0 * s);
                let scale2 = 1.0 + p.factor_d2(t).abs();
                assert!((fd2 - p.factor_d2(t)).abs() < 1e-3 * scale2 / p.delta, "{p:?} t={t}");
            }
        }
    }

    #[test]
    fn plateau_partition_of_unity_is_exact() {
        let p = ProfileFunction { kind: ProfileKind::Plateau, delta: 0.2 };
        for i in 0..200 {
            let t = -3.0 + 0.0317 * i as f64;
            assert!((p.periodic_sum(t) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn alpha_bounds_hold() {
        for p in kinds() {
            let max = (0..2001)
                .map(|i| p.factor(-p.support_radius() + p.support_radius() * i as f64 / 1000.0))
                .fold(0.0, f64::max);
            assert!(max <= p.alpha_bound() * (1.0 + 1e-12), "{p:?} {max}");
        }
    }

    #[test]
    fn mollifier_gradient_sup() {
        let g = mollifier_grad_sup();
        assert!((g - 15.0 / 8.0).abs() < 1e-6, "{g}");
        let d0 = ProfileFunction::delta0(ProfileKind::Mollifier);
        assert!((d0 - 1.0 / (640.0 + 32.0 * 225.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn delta_validation() {
        assert!(ProfileFunction { kind: ProfileKind::Plateau, delta: 0.1 }.check(false).is_err());
        assert!(ProfileFunction { kind: ProfileKind::Plateau, delta: 0.1 }.check(true).is_ok());
        assert!(ProfileFunction { kind: ProfileKind::Plateau, delta: 0.3 }.check(true).is_err());
        assert!(ProfileFunction::plateau().check(false).is_ok());
    }
}
