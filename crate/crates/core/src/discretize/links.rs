use super::grid::{Axis, Edge, Grid};
use crate::error::Result;
use crate::gauges::{
    divergence_free, AlphaGauge, ColumnGauge, GaugeKind, PoincareGauge, VectorPotential,
};
use crate::randfield::MagneticFieldView;

/// Phases `theta_{x -> y} = int_x^y A . ds` on every edge touching an interior node,
/// including the edges to the Dirichlet ring.
///
/// x-edges: row `j in [0, n)`, from `i in [-1, n)` to `i + 1`;
/// y-edges: column `i in [0, n)`, from `j in [-1, n)` to `j + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkPhases {
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl LinkPhases {
    pub fn zeros(n: usize) -> Self {
        LinkPhases {
            n,
            x: vec![0.0; n * (n + 1)],
            y: vec![0.0; n * (n + 1)],
        }
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 2], [f64; 2]) -> Result<f64>) -> Result<Self> {
        let n = grid.n;
        let mut out = Self::zeros(n);
        for j in 0..n as i64 {
            for i in -1..n as i64 {
                let v = f(grid.point(i, j), grid.point(i + 1, j))?;
                out.set_x(i, j as usize, v);
            }
        }
        for i in 0..n as i64 {
            for j in -1..n as i64 {
                let v = f(grid.point(i, j), grid.point(i, j + 1))?;
                out.set_y(i as usize, j, v);
            }
        }
        Ok(out)
    }

    fn xi(&self, i: i64, j: usize) -> usize {
        j * (self.n + 1) + (i + 1) as usize
    }

    fn yi(&self, i: usize, j: i64) -> usize {
        i * (self.n + 1) + (j + 1) as usize
    }

    /// Phase from `(i, j)` to `(i + 1, j)`.
    pub fn x_edge(&self, i: i64, j: usize) -> f64 {
        self.x[self.xi(i, j)]
    }

    /// Phase from `(i, j)` to `(i, j + 1)`.
    pub fn y_edge(&self, i: usize, j: i64) -> f64 {
        self.y[self.yi(i, j)]
    }

    pub fn set_x(&mut self, i: i64, j: usize, v: f64) {
        let k = self.xi(i, j);
        self.x[k] = v;
    }

    pub fn set_y(&mut self, i: usize, j: i64, v: f64) {
        let k = self.yi(i, j);
        self.y[k] = v;
    }

    /// Phase of an interior edge in its positive direction.
    pub fn edge(&self, e: Edge) -> f64 {
        match e.axis {
            Axis::X => self.x_edge(e.i as i64, e.j),
            Axis::Y => self.y_edge(e.i, e.j as i64),
        }
    }

    /// Circulation around the plaquette with lower-left node `(i, j)`, for
    /// `i, j in [-1, n)` where all four edges are stored.
    pub fn plaquette(&self, i: i64, j: i64) -> Option<f64> {
        let n = self.n as i64;
        if i < 0 || j < 0 || i + 1 >= n || j + 1 >= n {
            return None;
        }
        let (iu, ju) = (i as usize, j as usize);
        Some(
            self.x_edge(i, ju) + self.y_edge(iu + 1, j) - self.x_edge(i, ju + 1) - self.y_edge(iu, j),
        )
    }

    pub fn add_scaled(&mut self, other: &LinkPhases, s: f64) {
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a += s * b;
        }
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += s * b;
        }
    }
}

/// Link phases of `B_omega` on `grid` in the chosen gauge.
pub fn link_phases(view: &MagneticFieldView, grid: &Grid, gauge: GaugeKind) -> Result<LinkPhases> {
    let lo = grid.square().lo();
    match gauge {
        GaugeKind::Alpha1 | GaugeKind::Alpha2 => {
            let tau = if gauge == GaugeKind::Alpha1 { 1 } else { 2 };
            let g = AlphaGauge::new(*view, tau)?;
            LinkPhases::from_fn(grid, |a, b| g.edge_integral(a, b))
        }
        GaugeKind::Column => {
            let g = ColumnGauge::new(*view, lo[0]);
            LinkPhases::from_fn(grid, |a, b| g.edge_integral(a, b))
        }
        GaugeKind::Poincare => poincare_phases(view, grid),
        GaugeKind::DivergenceFree => Ok(divergence_free(&poincare_phases(view, grid)?)),
    }
}

fn poincare_phases(view: &MagneticFieldView, grid: &Grid) -> Result<LinkPhases> {
    let g = PoincareGauge::new(*view, grid.center);
    let n = grid.n as i64;
    let w = (n + 2) as usize;
    let mut rays = vec![0.0; w * w];
    for j in -1..=n {
        for i in -1..=n {
            let corner = (i == -1 || i == n) && (j == -1 || j == n);
            if !corner {
                rays[(j + 1) as usize * w + (i + 1) as usize] = g.ray_potential(grid.point(i, j))?;
            }
        }
    }
    let ray = |i: i64, j: i64| rays[(j + 1) as usize * w + (i + 1) as usize];
    let mut out = LinkPhases::zeros(grid.n);
    for j in 0..n {
        for i in -1..n {
            let (a, b) = (grid.point(i, j), grid.point(i + 1, j));
            out.set_x(i, j as usize, g.edge_from_rays(a, b, ray(i, j), ray(i + 1, j))?);
        }
    }
    for i in 0..n {
        for j in -1..n {
            let (a, b) = (grid.point(i, j), grid.point(i, j + 1));
            out.set_y(i as usize, j, g.edge_from_rays(a, b, ray(i, j), ray(i, j + 1))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Square;
    use crate::randfield::{DisorderRealization, DisorderSpec};

    #[test]
    fn plaquette_circulation_equals_flux_in_every_gauge() {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.25, -0.5], 3.0, 0.125).unwrap();
        let omega = DisorderRealization::generate(&spec, 17, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        for gauge in GaugeKind::ALL {
            let ph = link_phases(&view, &grid, gauge).unwrap();
            for (i, j) in [(0, 0), (5, 7), (20, 3), (21, 21)] {
                let p = ph.plaquette(i, j).unwrap();
                let a = grid.point(i, j);
                let b = grid.point(i + 1, j + 1);
                let f = view.rect_flux(a[0], b[0], a[1], b[1]).unwrap();
                assert!((p - f).abs() < 1e-11, "{gauge:?} ({i},{j}) {p} {f}");
            }
        }
    }

    #[test]
    fn region_too_small_is_reported() {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], 4.0, 0.25).unwrap();
        let omega = DisorderRealization::generate(&spec, 1, Square::new([0.0, 0.0], 2.0)).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        assert!(link_phases(&view, &grid, GaugeKind::Column).is_err());
    }
}
