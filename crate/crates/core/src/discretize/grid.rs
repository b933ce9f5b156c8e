use crate::error::{Error, Result};
use crate::geometry::Square;

/// Default cap on interior nodes.
pub const NODE_CAP: usize = 250_000;

/// Uniform grid of interior nodes of `center + [-L/2, L/2]^2` with spacing `h`.
///
/// Node `(i, j)`, `0 <= i, j < n`, sits at `lo + ((i + 1) h, (j + 1) h)` and has
/// linear index `j n + i`. Dirichlet values live on the ring `i, j in {-1, n}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub center: [f64; 2],
    pub side: f64,
    pub h: f64,
    pub n: usize,
}

/// Orientation of a nearest-neighbour edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

/// Directed edge from node `(i, j)` one step along `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub axis: Axis,
}

impl Grid {
    pub fn new(center: [f64; 2], side: f64, h: f64) -> Result<Self> {
        Self::with_cap(center, side, h, NODE_CAP)
    }

    pub fn with_cap(center: [f64; 2], side: f64, h: f64, cap: usize) -> Result<Self> {
        if !(h > 0.0) || !(side > 0.0) {
            return Err(Error::param("grid", "side and spacing must be positive"));
        }
        let ratio = side / h;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * ratio.max(1.0) || m < 4.0 {
            return Err(Error::param(
                "grid.spacing",
                format!("L/h = {ratio} must be an integer >= 4"),
            ));
        }
        let n = m as usize - 1;
        if n * n > cap {
            return Err(Error::TooLarge { nodes: n * n, cap });
        }
        Ok(Grid { center, side, h, n })
    }

    /// Reject spacings that do not resolve the finest field scale.
    pub fn check_resolution(&self, required: f64) -> Result<()> {
        if self.h > required * (1.0 + 1e-12) {
            Err(Error::Resolution { h: self.h, required })
        } else {
            Ok(())
        }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn square(&self) -> Square {
        Square::new(self.center, self.side)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    /// Position of node `(i, j)`; ring indices `-1` and `n` are allowed.
    pub fn point(&self, i: i64, j: i64) -> [f64; 2] {
        let lo0 = self.center[0] - 0.5 * self.side;
        let lo1 = self.center[1] - 0.5 * self.side;
        [lo0 + (i + 1) as f64 * self.h, lo1 + (j + 1) as f64 * self.h]
    }

    pub fn node(&self, idx: usize) -> [f64; 2] {
        let (i, j) = self.ij(idx);
        self.point(i as i64, j as i64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.dim()).map(|k| self.node(k))
    }

    /// Interior edges, x-edges first, each listed once in the positive direction.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let n = self.n;
        let xs = (0..n).flat_map(move |j| (0..n - 1).map(move |i| Edge { i, j, axis: Axis::X }));
        let ys = (0..n - 1).flat_map(move |j| (0..n).map(move |i| Edge { i, j, axis: Axis::Y }));
        xs.chain(ys)
    }

    pub fn edge_count(&self) -> usize {
        2 * self.n * (self.n - 1)
    }

    /// Node indices `(from, to)` of an interior edge.
    pub fn endpoints(&self, e: Edge) -> (usize, usize) {
        match e.axis {
            Axis::X => (self.index(e.i, e.j), self.index(e.i + 1, e.j)),
            Axis::Y => (self.index(e.i, e.j), self.index(e.i, e.j + 1)),
        }
    }

    pub fn edge_points(&self, e: Edge) -> ([f64; 2], [f64; 2]) {
        let a = self.point(e.i as i64, e.j as i64);
        let b = match e.axis {
            Axis::X => self.point(e.i as i64 + 1, e.j as i64),
            Axis::Y => self.point(e.i as i64, e.j as i64 + 1),
        };
        (a, b)
    }

    /// Nodes with `|x - c|_inf < r` relative to the grid center.
    pub fn nodes_within(&self, r: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| crate::geometry::sup_norm(self.node(k), self.center) < r)
            .collect()
    }

    /// Nodes with `r_in <= |x - c|_inf < r_out`.
    pub fn nodes_in_annulus(&self, r_in: f64, r_out: f64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&k| {
                let d = crate::geometry::sup_norm(self.node(k), self.center);
                d >= r_in && d < r_out
            })
            .collect()
    }
}
