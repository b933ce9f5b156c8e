use super::{segment_quadrature, ColumnGauge, VectorPotential};
use crate::error::Result;
use crate::quad::integrate;
use crate::randfield::MagneticFieldView;

/// Transversal gauge `A(x) = int_0^1 t B(p + t(x - p)) dt (-(x2 - p2), x1 - p1)`.
#[derive(Clone, Copy, Debug)]
pub struct PoincareGauge<'a> {
    pub view: MagneticFieldView<'a>,
    pub base: [f64; 2],
}

const TOL: f64 = 1e-14;

impl<'a> PoincareGauge<'a> {
    pub fn new(view: MagneticFieldView<'a>, base: [f64; 2]) -> Self {
        PoincareGauge { view, base }
    }

    fn column(&self) -> ColumnGauge<'a> {
        ColumnGauge::new(self.view, self.base[0])
    }

    /// `int_{base -> q} A_col . ds` along the ray; the column gauge shares the base abscissa.
    pub fn ray_potential(&self, q: [f64; 2]) -> Result<f64> {
        let p = self.base;
        let d = [q[0] - p[0], q[1] - p[1]];
        if d[1] == 0.0 {
            self.view.realization().check_point(q)?;
            return Ok(0.0);
        }
        let mut err = None;
        let v = integrate(
            |t| match self.view.row_integral(p[1] + t * d[1], p[0], p[0] + t * d[0]) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            TOL,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(v * d[1]),
        }
    }

    /// Edge integral from precomputed ray potentials at both ends (Stokes on the
    /// triangle `base, a, b`; the radial legs carry no Poincare circulation).
    pub fn edge_from_rays(&self, a: [f64; 2], b: [f64; 2], ra: f64, rb: f64) -> Result<f64> {
        Ok(ra + self.column().edge_integral(a, b)? - rb)
    }
}

impl VectorPotential for PoincareGauge<'_> {
    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let p = self.base;
        let d = [x[0] - p[0], x[1] - p[1]];
        let mut err = None;
        let w = integrate(
            |t| match self.view.field([p[0] + t * d[0], p[1] + t * d[1]]) {
                Ok(b) => t * b,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            TOL,
        );
        match err {
            Some(e) => Err(e),
            None => Ok([-w * d[1], w * d[0]]),
        }
    }

    fn edge_integral(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        if a[0] == b[0] || a[1] == b[1] {
            let ra = self.ray_potential(a)?;
            let rb = self.ray_potential(b)?;
            self.edge_from_rays(a, b, ra, rb)
        } else {
            segment_quadrature(self, a, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Square;
    use crate::randfield::{DisorderRealization, DisorderSpec};

    #[test]
    fn radial_component_vanishes_and_curl_is_b() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 2, Square::new([0.0, 0.0], 4.0)).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let g = PoincareGauge::new(view, [0.1, -0.2]);
        for x in [[1.0, 0.5], [-1.3, 1.7], [0.4, -1.9]] {
            let a = g.eval(x).unwrap();
            let r = [x[0] - 0.1, x[1] + 0.2];
            assert!((a[0] * r[0] + a[1] * r[1]).abs() < 1e-14);
            let e = 1e-5;
            let d1a2 = (g.eval([x[0] + e, x[1]]).unwrap()[1] - g.eval([x[0] - e, x[1]]).unwrap()[1]) / (2.0 * e);
            let d2a1 = (g.eval([x[0], x[1] + e]).unwrap()[0] - g.eval([x[0], x[1] - e]).unwrap()[0]) / (2.0 * e);
            assert!((d1a2 - d2a1 - view.field(x).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn stokes_edges_match_direct_quadrature() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 2, Square::new([0.0, 0.0], 4.0)).unwrap();
        let g = PoincareGauge::new(MagneticFieldView::new(&spec, &omega), [0.0, 0.0]);
        for (a, b) in [([0.5, 1.25], [0.75, 1.25]), ([-1.5, -0.25], [-1.5, 0.0]), ([1.0, 0.0], [1.0, 0.5])] {
            let s = g.edge_integral(a, b).unwrap();
            let q = segment_quadrature(&g, a, b).unwrap();
            assert!((s - q).abs() < 1e-11, "{s} {q}");
        }
    }
}
