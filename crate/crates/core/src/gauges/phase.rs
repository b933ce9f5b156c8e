use crate::error::Result;
use crate::quad::integrate;
use crate::randfield::MagneticFieldView;

/// Integration path from the origin to `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrder {
    /// Along `x1` first, then `x2`.
    AbscissaFirst,
    /// Along `x2` first, then `x1`.
    OrdinateFirst,
}

/// Second component of `T_a A[B] - A[T_a B]` where `A[B] = (0, int_0^{x1} B(s, x2) ds)`
/// and `T_a B = B(. - a)`. The first component vanishes.
fn covariance_defect(view: &MagneticFieldView, a: [f64; 2], x: [f64; 2]) -> Result<f64> {
    Ok(-view.row_integral(x[1] - a[1], -a[0], 0.0)?)
}

/// Gauge function `lambda_a` with `A[T_a B] = T_a A[B] - grad lambda_a`,
/// normalized by `lambda_a(0) = 0`, computed by line quadrature along `path`.
///
/// `view` must describe the untranslated field `B` and cover the points `x - a`.
pub fn gauge_phase(view: &MagneticFieldView, a: [f64; 2], x: [f64; 2], path: PathOrder) -> Result<f64> {
    let mut err = None;
    let mut leg = |from: [f64; 2], to: [f64; 2]| -> f64 {
        let d = [to[0] - from[0], to[1] - from[1]];
        if d[1] == 0.0 {
            return 0.0;
        }
        integrate(
            |t| match covariance_defect(view, a, [from[0] + t * d[0], from[1] + t * d[1]]) {
                Ok(v) => v * d[1],
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            1.0,
            1e-14,
        )
    };
    let v = match path {
        PathOrder::AbscissaFirst => leg([0.0, 0.0], [x[0], 0.0]) + leg([x[0], 0.0], x),
        PathOrder::OrdinateFirst => leg([0.0, 0.0], [0.0, x[1]]) + leg([0.0, x[1]], x),
    };
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Closed form of [`gauge_phase`]: minus the flux of `B` through
/// `[-a1, 0] x [-a2, x2 - a2]`.
pub fn gauge_phase_exact(view: &MagneticFieldView, a: [f64; 2], x: [f64; 2]) -> Result<f64> {
    Ok(-view.rect_flux(-a[0], 0.0, -a[1], x[1] - a[1])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Square;
    use crate::randfield::{DisorderRealization, DisorderSpec};

    #[test]
    fn path_independent_and_matches_closed_form() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 6, Square::new([0.0, 0.0], 8.0)).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let a = [1.0, -2.0];
        for x in [[0.5, 0.7], [-1.2, 1.9], [1.5, -0.4]] {
            let p = gauge_phase(&view, a, x, PathOrder::AbscissaFirst).unwrap();
            let q = gauge_phase(&view, a, x, PathOrder::OrdinateFirst).unwrap();
            let e = gauge_phase_exact(&view, a, x).unwrap();
            assert!((p - q).abs() < 1e-12 && (p - e).abs() < 1e-11, "{p} {q} {e}");
        }
    }

    #[test]
    fn cocycle_up_to_constant() {
        let spec = DisorderSpec::example();
        let omega = DisorderRealization::generate(&spec, 6, Square::new([0.0, 0.0], 12.0)).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let (a, b) = ([1.0, 0.0], [0.0, 1.0]);
        let ab = [a[0] + b[0], a[1] + b[1]];
        // lambda_{a+b}[B](x) - lambda_a[B](x - b) - lambda_b[T_a B](x) is constant
        let shifted = DisorderRealization::generate_shifted(&spec, 6, Square::new([0.0, 0.0], 12.0), [1, 0]).unwrap();
        let sview = MagneticFieldView::new(&spec, &shifted);
        let c = |x: [f64; 2]| {
            gauge_phase_exact(&view, ab, x).unwrap()
                - gauge_phase_exact(&view, a, [x[0] - b[0], x[1] - b[1]]).unwrap()
                - gauge_phase_exact(&sview, b, x).unwrap()
        };
        let c0 = c([0.0, 0.0]);
        for x in [[0.3, 0.2], [-1.0, 2.0], [2.5, -1.5]] {
            assert!((c(x) - c0).abs() < 1e-10, "{} {}", c(x), c0);
        }
    }
}
