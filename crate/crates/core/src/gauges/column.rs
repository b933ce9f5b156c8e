use super::{segment_quadrature, VectorPotential};
use crate::error::Result;
use crate::randfield::MagneticFieldView;

/// `A(x) = (0, int_{base}^{x1} B(s, x2) ds)`.
#[derive(Clone, Copy, Debug)]
pub struct ColumnGauge<'a> {
    pub view: MagneticFieldView<'a>,
    pub base: f64,
}

impl<'a> ColumnGauge<'a> {
    pub fn new(view: MagneticFieldView<'a>, base: f64) -> Self {
        ColumnGauge { view, base }
    }
}

impl VectorPotential for ColumnGauge<'_> {
    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        Ok([0.0, self.view.row_integral(x[1], self.base, x[0])?])
    }

    fn edge_integral(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        if a[1] == b[1] {
            self.view.realization().check_point(a)?;
            self.view.realization().check_point(b)?;
            Ok(0.0)
        } else if a[0] == b[0] {
            self.view.rect_flux(self.base, a[0], a[1], b[1])
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
    fn edges_match_quadrature() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 8, Square::new([1.0, 1.0], 4.0)).unwrap();
        let g = ColumnGauge::new(MagneticFieldView::new(&spec, &omega), -1.0);
        let (p, q) = ([0.4, -0.5], [0.4, 2.2]);
        let e = g.edge_integral(p, q).unwrap();
        assert!((e - segment_quadrature(&g, p, q).unwrap()).abs() < 1e-11);
        assert_eq!(g.edge_integral([0.0, 0.5], [1.0, 0.5]).unwrap(), 0.0);
    }
}
