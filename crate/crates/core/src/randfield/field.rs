use super::realization::DisorderRealization;
use super::spec::DisorderSpec;
use crate::error::{Error, Result};
use crate::geometry::Square;

/// Evaluates `B_omega`, `V` and exact integrals of `B_omega` for one realization.
#[derive(Clone, Copy, Debug)]
pub struct MagneticFieldView<'a> {
    spec: &'a DisorderSpec,
    omega: &'a DisorderRealization,
    level_mask: u64,
    background: bool,
}

impl<'a> MagneticFieldView<'a> {
    pub fn new(spec: &'a DisorderSpec, omega: &'a DisorderRealization) -> Self {
        MagneticFieldView {
            spec,
            omega,
            level_mask: u64::MAX,
            background: true,
        }
    }

    /// Drop level `k` from the random sum.
    pub fn without_level(mut self, k: u32) -> Self {
        self.level_mask &= !(1u64 << k);
        self
    }

    /// Random part only (no `B_det`).
    pub fn random_part(mut self) -> Self {
        self.background = false;
        self
    }

    pub fn spec(&self) -> &'a DisorderSpec {
        self.spec
    }

    pub fn realization(&self) -> &'a DisorderRealization {
        self.omega
    }

    pub fn region(&self) -> Square {
        self.omega.region()
    }

    /// Levels included in the random sum.
    pub fn active_levels(&self) -> Vec<u32> {
        self.levels().collect()
    }

    pub fn includes_background(&self) -> bool {
        self.background
    }

    fn levels(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.spec.k_max.min(self.omega.k_max())).filter(|k| self.level_mask & (1u64 << k) != 0)
    }

    fn coeff(&self, k: u32, i: i64, j: i64, weight: f64) -> Result<f64> {
        if weight == 0.0 {
            return Ok(0.0);
        }
        match self.omega.get(k, i, j) {
            Some(v) => Ok(v * weight),
            None => {
                let s = (1u64 << k) as f64;
                Err(Error::OutOfRegion { x: i as f64 / s, y: j as f64 / s })
            }
        }
    }

    fn window(&self, s: f64, a: f64, b: f64) -> std::ops::RangeInclusive<i64> {
        let r = self.omega.support_radius();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        (lo * s - r).floor() as i64..=(hi * s + r).ceil() as i64
    }

    /// Generic double sum `mu sum_k scale_k sum_{i,j} omega fx(i) fy(j)`.
    fn random_sum(
        &self,
        xr: (f64, f64),
        yr: (f64, f64),
        mut fx: impl FnMut(&Self, f64, i64) -> f64,
        mut fy: impl FnMut(&Self, f64, i64) -> f64,
        scale: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for k in self.levels() {
            let s = (1u64 << k) as f64;
            let xs: Vec<(i64, f64)> = self
                .window(s, xr.0, xr.1)
                .map(|i| (i, fx(self, s, i)))
                .filter(|p| p.1 != 0.0)
                .collect();
            if xs.is_empty() {
                continue;
            }
            let mut level = 0.0;
            for j in self.window(s, yr.0, yr.1) {
                let wy = fy(self, s, j);
                if wy == 0.0 {
                    continue;
                }
                for &(i, wx) in &xs {
                    level += self.coeff(k, i, j, wx * wy)?;
                }
            }
            total += scale(s) * level;
        }
        Ok(self.spec.mu * total)
    }

    fn background_field(&self, x: [f64; 2]) -> f64 {
        if self.background {
            self.spec.b_det.eval(x)
        } else {
            0.0
        }
    }

    /// `B_omega(x)`.
    pub fn field(&self, x: [f64; 2]) -> Result<f64> {
        self.omega.check_point(x)?;
        let p = self.spec.profile;
        let r = self.random_sum(
            (x[0], x[0]),
            (x[1], x[1]),
            |_, s, i| p.factor(s * x[0] - i as f64),
            |_, s, j| p.factor(s * x[1] - j as f64),
            |_| 1.0,
        )?;
        Ok(self.background_field(x) + r)
    }

    /// `grad B_omega(x)` in closed form.
    pub fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        self.omega.check_point(x)?;
        let p = self.spec.profile;
        let gx = self.random_sum(
            (x[0], x[0]),
            (x[1], x[1]),
            |_, s, i| s * p.factor_d1(s * x[0] - i as f64),
            |_, s, j| p.factor(s * x[1] - j as f64),
            |_| 1.0,
        )?;
        let gy = self.random_sum(
            (x[0], x[0]),
            (x[1], x[1]),
            |_, s, i| p.factor(s * x[0] - i as f64),
            |_, s, j| s * p.factor_d1(s * x[1] - j as f64),
            |_| 1.0,
        )?;
        let g = if self.background {
            self.spec.b_det.gradient(x)
        } else {
            [0.0; 2]
        };
        Ok([g[0] + gx, g[1] + gy])
    }

    pub fn potential(&self, x: [f64; 2]) -> f64 {
        self.spec.potential.eval(x)
    }

    /// `int_a^b B_omega(s, x2) ds`.
    pub fn row_integral(&self, x2: f64, a: f64, b: f64) -> Result<f64> {
        self.omega.check_point([a, x2])?;
        self.omega.check_point([b, x2])?;
        let p = self.spec.profile;
        let r = self.random_sum(
            (a, b),
            (x2, x2),
            |_, s, i| p.factor_int(s * b - i as f64) - p.factor_int(s * a - i as f64),
            |_, s, j| p.factor(s * x2 - j as f64),
            |s| 1.0 / s,
        )?;
        let det = if self.background {
            self.spec.b_det.row_integral(x2, a, b)
        } else {
            0.0
        };
        Ok(det + r)
    }

    /// `int_{y0}^{y1} B_omega(x1, t) dt`.
    pub fn column_integral(&self, x1: f64, y0: f64, y1: f64) -> Result<f64> {
        self.omega.check_point([x1, y0])?;
        self.omega.check_point([x1, y1])?;
        let p = self.spec.profile;
        let r = self.random_sum(
            (x1, x1),
            (y0, y1),
            |_, s, i| p.factor(s * x1 - i as f64),
            |_, s, j| p.factor_int(s * y1 - j as f64) - p.factor_int(s * y0 - j as f64),
            |s| 1.0 / s,
        )?;
        let det = if self.background {
            let mut t = self.spec.b_det.clone();
            for term in &mut t.terms {
                std::mem::swap(&mut term.m, &mut term.n);
            }
            t.row_integral(x1, y0, y1)
        } else {
            0.0
        };
        Ok(det + r)
    }

    /// Signed flux `int_{x0}^{x1} int_{y0}^{y1} B_omega`.
    pub fn rect_flux(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> Result<f64> {
        for c in [[x0, y0], [x1, y1]] {
            self.omega.check_point(c)?;
        }
        let p = self.spec.profile;
        let r = self.random_sum(
            (x0, x1),
            (y0, y1),
            |_, s, i| p.factor_int(s * x1 - i as f64) - p.factor_int(s * x0 - i as f64),
            |_, s, j| p.factor_int(s * y1 - j as f64) - p.factor_int(s * y0 - j as f64),
            |s| 1.0 / (s * s),
        )?;
        let det = if self.background {
            self.spec.b_det.rect_integral(x0, x1, y0, y1)
        } else {
            0.0
        };
        Ok(det + r)
    }

    /// Min and max of `B_omega + V` over a box, by grid search with refinement.
    pub fn extrema_b_plus_v(&self, region: Square, tol: f64) -> Result<(f64, f64)> {
        let f = |x: [f64; 2]| -> Result<f64> { Ok(self.field(x)? + self.potential(x)) };
        grid_extrema(region, tol, f)
    }
}

/// Min and max of `f` over a closed box on dyadic grids, refined until two
/// successive levels agree to relative `tol`.
pub fn grid_extrema(
    region: Square,
    tol: f64,
    f: impl Fn([f64; 2]) -> Result<f64>,
) -> Result<(f64, f64)> {
    let lo = region.lo();
    let mut prev: Option<(f64, f64)> = None;
    for level in 4..=10 {
        let n = (1usize << level).max((region.side * 16.0) as usize);
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for a in 0..=n {
            for b in 0..=n {
                let x = [
                    lo[0] + region.side * a as f64 / n as f64,
                    lo[1] + region.side * b as f64 / n as f64,
                ];
                let v = f(x)?;
                mn = mn.min(v);
                mx = mx.max(v);
            }
        }
        if let Some((pm, px)) = prev {
            let scale = mn.abs().max(mx.abs()).max(1e-300);
            if (pm - mn).abs() <= tol * scale && (px - mx).abs() <= tol * scale {
                return Ok((mn, mx));
            }
        }
        prev = Some((mn, mx));
        if n > 2048 {
            break;
        }
    }
    Ok(prev.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    fn setup() -> (DisorderSpec, DisorderRealization) {
        let spec = DisorderSpec::example();
        let r = DisorderRealization::generate(&spec, 21, Square::new([0.3, -0.2], 5.0)).unwrap();
        (spec, r)
    }

    #[test]
    fn integrals_match_quadrature_of_point_values() {
        let (spec, r) = setup();
        let v = MagneticFieldView::new(&spec, &r);
        let row = integrate(|s| v.field([s, 0.41]).unwrap(), -1.7, 2.2, 1e-12);
        assert!((row - v.row_integral(0.41, -1.7, 2.2).unwrap()).abs() < 1e-10);
        let col = integrate(|t| v.field([0.9, t]).unwrap(), 1.3, -1.1, 1e-12);
        assert!((col - v.column_integral(0.9, 1.3, -1.1).unwrap()).abs() < 1e-10);
        let rect = integrate(|t| v.row_integral(t, -0.6, 1.1).unwrap(), -1.0, 0.7, 1e-12);
        assert!((rect - v.rect_flux(-0.6, 1.1, -1.0, 0.7).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_fd() {
        let (spec, r) = setup();
        let v = MagneticFieldView::new(&spec, &r);
        let e = 1e-6;
        for x in [[0.1, 0.2], [-1.3, 0.77], [1.9, -2.0]] {
            let g = v.gradient(x).unwrap();
            let fx = (v.field([x[0] + e, x[1]]).unwrap() - v.field([x[0] - e, x[1]]).unwrap()) / (2.0 * e);
            let fy = (v.field([x[0], x[1] + e]).unwrap() - v.field([x[0], x[1] - e]).unwrap()) / (2.0 * e);
            assert!((g[0] - fx).abs() < 1e-6 && (g[1] - fy).abs() < 1e-6, "{g:?} {fx} {fy}");
        }
    }

    #[test]
    fn outside_region_is_an_error() {
        let (spec, r) = setup();
        let v = MagneticFieldView::new(&spec, &r);
        assert!(matches!(v.field([10.0, 0.0]), Err(Error::OutOfRegion { .. })));
        assert!(v.field([2.8, 2.3]).is_ok());
    }

    #[test]
    fn pointwise_bounds_hold() {
        let (spec, r) = setup();
        let v = MagneticFieldView::new(&spec, &r);
        let (mn, mx) = v.extrema_b_plus_v(Square::new([0.3, -0.2], 5.0), 1e-4).unwrap();
        assert!(mn >= spec.b0 - spec.b0 / 4.0);
        let rnd = spec.mu * (0..=spec.k_max).map(|k| spec.sigma(k)).sum::<f64>();
        assert!(mx <= (spec.k0 - 1.0) * spec.b0 + rnd + spec.b0 / 4.0);
    }
}
