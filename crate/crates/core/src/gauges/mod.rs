//! Vector potentials for a given field and their Peierls link phases.

mod alpha;
mod column;
mod disk;
mod divfree;
mod phase;
mod poincare;

use serde::{Deserialize, Serialize};

pub use alpha::{AlphaColumn, AlphaGauge};
pub use column::ColumnGauge;
pub use disk::{disk_l2_sq, disk_lower_bound, SymmetricGauge};
pub use divfree::{discrete_divergence, divergence_free};
pub use phase::{gauge_phase, gauge_phase_exact, PathOrder};
pub use poincare::PoincareGauge;

use crate::error::Result;
use crate::quad::integrate;

/// Gauge used to turn `B` into link phases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    /// Background and site columns integrated along `x2` (first component only).
    Alpha1,
    /// Background and site columns integrated along `x1` (second component only).
    Alpha2,
    /// `A = (0, int_{c}^{x1} B(s, x2) ds)` from the left edge of the box.
    Column,
    /// `A(x) = int_0^1 t B(p + t(x - p)) dt (-(x2 - p2), x1 - p1)` about the box center.
    Poincare,
    /// Poincare phases corrected to zero discrete divergence.
    DivergenceFree,
}

impl GaugeKind {
    pub const ALL: [GaugeKind; 5] = [
        GaugeKind::Alpha1,
        GaugeKind::Alpha2,
        GaugeKind::Column,
        GaugeKind::Poincare,
        GaugeKind::DivergenceFree,
    ];
}

/// A continuum vector potential.
pub trait VectorPotential {
    fn eval(&self, x: [f64; 2]) -> Result<[f64; 2]>;

    /// `int_a^b A . ds` along the straight segment.
    fn edge_integral(&self, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
        segment_quadrature(self, a, b)
    }
}

/// Line integral by adaptive quadrature; errors inside the integrand are propagated.
pub(crate) fn segment_quadrature<P: VectorPotential + ?Sized>(
    p: &P,
    a: [f64; 2],
    b: [f64; 2],
) -> Result<f64> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let mut err = None;
    let v = integrate(
        |t| match p.eval([a[0] + t * d[0], a[1] + t * d[1]]) {
            Ok(v) => v[0] * d[0] + v[1] * d[1],
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        1e-13,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}
