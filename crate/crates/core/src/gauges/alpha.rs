use super::{segment_quadrature, VectorPotential};
use crate::error::{Error, Result};
use crate::randfield::{MagneticFieldView, ProfileFunction};

/// Vector potential of one site profile `beta_z(x) = u(2^k (x - z))`.
///
/// `tau = 1`: `alpha = -(int_{-inf}^{x2} beta ds) e1`;
/// `tau = 2`: `alpha = (int_{-inf}^{x1} beta ds) e2`. Both have curl `beta`.
#[derive(Clone, Copy, Debug)]
pub struct AlphaColumn {
    pub profile: ProfileFunction,
    pub k: u32,
    pub site: [i64; 2],
    pub tau: u8,
}

impl AlphaColumn {
    pub fn new(profile: ProfileFunction, k: u32, site: [i64; 2], tau: u8) -> Result<Self> {
        if tau != 1 && tau != 2 {
            return Err(Error::param("tau", "must be 1 or 2"));
        }
        Ok(AlphaColumn { profile, k, site, tau })
    }

    fn scale(&self) -> f64 {
        (1u64 << self.k) as f64
    }

    /// Local coordinates `2^k x - z_index`.
    fn local(&self, x: [f64; 2]) -> [f64; 2] {
        let s = self.scale();
        [s * x[0] - self.site[0] as f64, s * x[1] - self.site[1] as f64]
    }

    pub fn center(&self) -> [f64; 2] {
        let s = self.scale();
        [self.site[0] as f64 / s, self.site[1] as f64 / s]
    }

    /// Sup-norm bound `|alpha| <= eps` (plateau) or `delta eps` (mollifier).
    pub fn bound(&self) -> f64 {
        self.profile.alpha_bound() / self.scale()
    }

    /// `beta_z(x)`.
    pub fn beta(&self, x: [f64; 2]) -> f64 {
        self.profile.eval(self.local(x))
    }
}

impl VectorPotential for AlphaColumn {
    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let p = &self.profile;
        let y = self.local(x);
        let eps = 1.0 / self.scale();
        Ok(if self.tau == 1 {
            [-eps * p.factor(y[0]) * p.factor_int(y[1]), 0.0]
        } else {
            [0.0, eps * p.factor_int(y[0]) * p.factor(y[1])]
        })
    }

    fn edge_integral(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        let p = &self.profile;
        let (ya, yb) = (self.local(a), self.local(b));
        let eps = 1.0 / self.scale();
        if a[1] == b[1] {
            Ok(if self.tau == 1 {
                -eps * eps * (p.factor_int(yb[0]) - p.factor_int(ya[0])) * p.factor_int(ya[1])
            } else {
                0.0
            })
        } else if a[0] == b[0] {
            Ok(if self.tau == 2 {
                eps * eps * p.factor_int(ya[0]) * (p.factor_int(yb[1]) - p.factor_int(ya[1]))
            } else {
                0.0
            })
        } else {
            segment_quadrature(self, a, b)
        }
    }
}

/// `A^(tau) = A_det^(tau) + mu sum_z omega_z alpha_z^(tau)` over the realized sites.
#[derive(Clone, Copy, Debug)]
pub struct AlphaGauge<'a> {
    pub view: MagneticFieldView<'a>,
    pub tau: u8,
}

impl<'a> AlphaGauge<'a> {
    pub fn new(view: MagneticFieldView<'a>, tau: u8) -> Result<Self> {
        if tau != 1 && tau != 2 {
            return Err(Error::param("tau", "must be 1 or 2"));
        }
        Ok(AlphaGauge { view, tau })
    }

    /// `mu sum_k eps^2 sum_{i,j} omega w_along(i) w_across(j)` where `along`
    /// is the integrated direction.
    fn site_sum(
        &self,
        along: (f64, f64),
        across: f64,
        weight: impl Fn(f64, f64, i64, i64) -> f64,
        pow: i32,
    ) -> Result<f64> {
        let spec = self.view.spec();
        let omega = self.view.realization();
        let r = omega.support_radius();
        let mut total = 0.0;
        for k in self.view.active_levels() {
            let s = (1u64 << k) as f64;
            let (wi, wj) = omega.level_window(k);
            // `col` runs across the integrated direction, `row` along it.
            let (cw, rw) = if self.tau == 1 { (wi, wj) } else { (wj, wi) };
            let (lo, hi) = if along.0 <= along.1 { along } else { (along.1, along.0) };
            let c0 = ((lo * s - r).floor() as i64).max(cw[0]);
            let c1 = ((hi * s + r).ceil() as i64).min(cw[1]);
            let r1 = ((across * s + r).ceil() as i64).min(rw[1]);
            let mut level = 0.0;
            for c in c0..=c1 {
                for q in rw[0]..=r1 {
                    let w = weight(s, along.1, c, q) - weight(s, along.0, c, q);
                    if w == 0.0 {
                        continue;
                    }
                    let (i, j) = if self.tau == 1 { (c, q) } else { (q, c) };
                    level += w * omega.get(k, i, j).unwrap_or(0.0);
                }
            }
            total += level / s.powi(pow);
        }
        Ok(spec.mu * total)
    }
}

impl VectorPotential for AlphaGauge<'_> {
    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.view.realization().check_point(x)?;
        let spec = self.view.spec();
        let bg = self.view.includes_background();
        if self.tau == 1 {
            let det = if bg { column_of(spec, x[0], 0.0, x[1]) } else { 0.0 };
            let v = self.point_sum(x)?;
            Ok([-det - v, 0.0])
        } else {
            let det = if bg { spec.b_det.row_integral(x[1], 0.0, x[0]) } else { 0.0 };
            let v = self.point_sum(x)?;
            Ok([0.0, det + v])
        }
    }

    fn edge_integral(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        let omega = self.view.realization();
        omega.check_point(a)?;
        omega.check_point(b)?;
        let spec = self.view.spec();
        let p = spec.profile;
        let bg = self.view.includes_background();
        let horizontal = a[1] == b[1];
        let vertical = a[0] == b[0];
        match (self.tau, horizontal, vertical) {
            (1, true, _) => {
                let y = a[1];
                let det = if bg { spec.b_det.rect_integral(a[0], b[0], 0.0, y) } else { 0.0 };
                let r = self.site_sum(
                    (a[0], b[0]),
                    y,
                    |s, t, c, q| p.factor_int(s * t - c as f64) * p.factor_int(s * y - q as f64),
                    2,
                )?;
                Ok(-det - r)
            }
            (2, _, true) => {
                let x = a[0];
                let det = if bg { spec.b_det.rect_integral(0.0, x, a[1], b[1]) } else { 0.0 };
                let r = self.site_sum(
                    (a[1], b[1]),
                    x,
                    |s, t, c, q| p.factor_int(s * t - c as f64) * p.factor_int(s * x - q as f64),
                    2,
                )?;
                Ok(det + r)
            }
            (1, false, true) | (2, true, false) => Ok(0.0),
            _ => segment_quadrature(self, a, b),
        }
    }
}

impl AlphaGauge<'_> {
    /// `mu sum omega eps phi(.) Phi(.)` at a point, oriented by `tau`.
    fn point_sum(&self, x: [f64; 2]) -> Result<f64> {
        let spec = self.view.spec();
        let omega = self.view.realization();
        let p = spec.profile;
        let r = omega.support_radius();
        let mut total = 0.0;
        for k in self.view.active_levels() {
            let s = (1u64 << k) as f64;
            let (wi, wj) = omega.level_window(k);
            let (cw, rw, xc, xr) = if self.tau == 1 {
                (wi, wj, x[0], x[1])
            } else {
                (wj, wi, x[1], x[0])
            };
            let c0 = ((xc * s - r).floor() as i64).max(cw[0]);
            let c1 = ((xc * s + r).ceil() as i64).min(cw[1]);
            let r1 = ((xr * s + r).ceil() as i64).min(rw[1]);
            let mut level = 0.0;
            for c in c0..=c1 {
                let wc = p.factor(s * xc - c as f64);
                if wc == 0.0 {
                    continue;
                }
                for q in rw[0]..=r1 {
                    let wq = p.factor_int(s * xr - q as f64);
                    if wq == 0.0 {
                        continue;
                    }
                    let (i, j) = if self.tau == 1 { (c, q) } else { (q, c) };
                    level += wc * wq * omega.get(k, i, j).unwrap_or(0.0);
                }
            }
            total += level / s;
        }
        Ok(spec.mu * total)
    }
}

/// `int_{y0}^{y1} B_det(x1, t) dt`.
fn column_of(spec: &crate::DisorderSpec, x1: f64, y0: f64, y1: f64) -> f64 {
    let mut t = spec.b_det.clone();
    for term in &mut t.terms {
        std::mem::swap(&mut term.m, &mut term.n);
    }
    t.row_integral(x1, y0, y1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Square;
    use crate::randfield::{DisorderRealization, DisorderSpec, ProfileKind};

    fn curl_at<P: VectorPotential>(p: &P, x: [f64; 2], e: f64) -> f64 {
        let a = |y: [f64; 2]| p.eval(y).unwrap();
        let d1a2 = (a([x[0] + e, x[1]])[1] - a([x[0] - e, x[1]])[1]) / (2.0 * e);
        let d2a1 = (a([x[0], x[1] + e])[0] - a([x[0], x[1] - e])[0]) / (2.0 * e);
        d1a2 - d2a1
    }

    #[test]
    fn single_site_curl_and_bound() {
        for kind in [ProfileKind::Plateau, ProfileKind::Mollifier] {
            let prof = ProfileFunction { kind, delta: 0.2 };
            for tau in [1, 2] {
                let a = AlphaColumn::new(prof, 1, [1, -1], tau).unwrap();
                for x in [[0.5, -0.5], [0.7, -0.3], [0.3, 0.9], [1.2, -0.61]] {
                    let c = curl_at(&a, x, 1e-6);
                    assert!((c - a.beta(x)).abs() < 1e-6, "{kind:?} tau={tau} {c} {}", a.beta(x));
                    let v = a.eval(x).unwrap();
                    assert!(v[0].abs().max(v[1].abs()) <= a.bound() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn single_site_edges_match_quadrature() {
        let prof = ProfileFunction { kind: ProfileKind::Plateau, delta: 0.1 };
        for tau in [1, 2] {
            let a = AlphaColumn::new(prof, 0, [0, 0], tau).unwrap();
            for (p, q) in [([-0.8, 0.2], [0.45, 0.2]), ([0.1, -0.9], [0.1, 0.3])] {
                let exact = a.edge_integral(p, q).unwrap();
                let num = segment_quadrature(&a, p, q).unwrap();
                assert!((exact - num).abs() < 1e-12, "tau={tau}");
            }
        }
    }

    #[test]
    fn field_gauges_have_curl_b() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 4, Square::new([0.0, 0.0], 4.0)).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        for tau in [1, 2] {
            let g = AlphaGauge::new(view, tau).unwrap();
            for x in [[0.13, 0.41], [-1.2, 0.9], [1.5, -1.7]] {
                let c = curl_at(&g, x, 1e-5);
                let b = view.field(x).unwrap();
                assert!((c - b).abs() < 1e-6, "tau={tau} {c} {b}");
            }
            let (p, q) = ([-1.0, 0.37], [1.25, 0.37]);
            let e = g.edge_integral(p, q).unwrap();
            assert!((e - segment_quadrature(&g, p, q).unwrap()).abs() < 1e-11);
            let (p, q) = ([0.6, -1.3], [0.6, 1.1]);
            let e = g.edge_integral(p, q).unwrap();
            assert!((e - segment_quadrature(&g, p, q).unwrap()).abs() < 1e-11);
        }
    }
}
