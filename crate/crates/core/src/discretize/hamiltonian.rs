use std::io::Write;

use num_complex::Complex64;

use super::grid::Grid;
use super::links::{link_phases, LinkPhases};
use crate::error::Result;
use crate::gauges::GaugeKind;
use crate::linalg::{Csr, HermitianBand};
use crate::randfield::MagneticFieldView;

/// Magnetic Dirichlet Laplacian plus potential on a grid.
///
/// `H_{y,x} = -exp(i theta_{x -> y}) / h^2` for neighbours and
/// `H_{x,x} = 4 / h^2 + V(x)`; the matrix is Hermitian by construction.
#[derive(Clone, Debug)]
pub struct DiscreteHamiltonian {
    pub grid: Grid,
    pub phases: LinkPhases,
    pub potential: Vec<f64>,
    pub matrix: Csr,
}

impl DiscreteHamiltonian {
    pub fn from_phases(grid: Grid, phases: LinkPhases, potential: Vec<f64>) -> Self {
        let n = grid.n;
        let h2 = 1.0 / (grid.h * grid.h);
        let mut rows = Vec::with_capacity(grid.dim());
        for j in 0..n {
            for i in 0..n {
                let mut row = Vec::with_capacity(5);
                let x = grid.index(i, j);
                row.push((x, Complex64::new(4.0 * h2 + potential[x], 0.0)));
                // H_{x,y} = -exp(-i theta_{x -> y}) / h^2
                if i + 1 < n {
                    row.push((x + 1, -Complex64::cis(-phases.x_edge(i as i64, j)) * h2));
                }
                if i > 0 {
                    row.push((x - 1, -Complex64::cis(phases.x_edge(i as i64 - 1, j)) * h2));
                }
                if j + 1 < n {
                    row.push((x + n, -Complex64::cis(-phases.y_edge(i, j as i64)) * h2));
                }
                if j > 0 {
                    row.push((x - n, -Complex64::cis(phases.y_edge(i, j as i64 - 1)) * h2));
                }
                rows.push(row);
            }
        }
        DiscreteHamiltonian {
            grid,
            phases,
            potential,
            matrix: Csr::from_rows(rows),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.matrix.matvec(x, y)
    }

    pub fn band(&self) -> HermitianBand {
        HermitianBand::from_csr(&self.matrix)
    }

    /// Rebuild with new phases, keeping grid and potential.
    pub fn with_phases(&self, phases: LinkPhases) -> Self {
        Self::from_phases(self.grid, phases, self.potential.clone())
    }

    /// `(row, col, re, im)` lines, zero-based, one stored entry per line.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<()> {
        for (r, c, v) in self.matrix.triplets() {
            writeln!(w, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    /// `||H||_inf` bound from Gershgorin discs.
    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.matrix.gershgorin();
        lo.abs().max(hi.abs())
    }
}

/// Options controlling how a Hamiltonian is assembled.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    /// Skip the check that `h` resolves the finest field scale.
    pub allow_coarse: bool,
}

pub fn build_hamiltonian(
    view: &MagneticFieldView,
    grid: &Grid,
    gauge: GaugeKind,
) -> Result<DiscreteHamiltonian> {
    build_hamiltonian_with(view, grid, gauge, BuildOptions::default())
}

pub fn build_hamiltonian_with(
    view: &MagneticFieldView,
    grid: &Grid,
    gauge: GaugeKind,
    opts: BuildOptions,
) -> Result<DiscreteHamiltonian> {
    if !opts.allow_coarse {
        grid.check_resolution(view.spec().required_spacing())?;
    }
    let sq = grid.square();
    for c in [sq.lo(), sq.hi()] {
        view.realization().check_point(c)?;
    }
    let phases = link_phases(view, grid, gauge)?;
    let potential: Vec<f64> = grid.nodes().map(|x| view.potential(x)).collect();
    Ok(DiscreteHamiltonian::from_phases(*grid, phases, potential))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_eigenvalues;
    use crate::randfield::{DisorderRealization, DisorderSpec};
    use std::f64::consts::PI;

    #[test]
    fn free_laplacian_matches_closed_form() {
        let grid = Grid::new([0.0, 0.0], 2.0, 0.25).unwrap();
        let h = DiscreteHamiltonian::from_phases(grid, LinkPhases::zeros(grid.n), vec![0.0; grid.dim()]);
        let ev = dense_eigenvalues(&h.matrix);
        let mut exact = Vec::new();
        for a in 1..=grid.n {
            for b in 1..=grid.n {
                let ca = (a as f64 * PI * grid.h / grid.side).cos();
                let cb = (b as f64 * PI * grid.h / grid.side).cos();
                exact.push(2.0 / (grid.h * grid.h) * (2.0 - ca - cb));
            }
        }
        exact.sort_by(|a, b| a.total_cmp(b));
        for (e, x) in ev.iter().zip(&exact) {
            assert!((e - x).abs() < 1e-11 * x.max(1.0));
        }
    }

    #[test]
    fn hermitian_and_gauge_independent_spectrum() {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], 2.5, 0.125).unwrap();
        let omega = DisorderRealization::generate(&spec, 5, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        let mut spectra = Vec::new();
        for g in GaugeKind::ALL {
            let h = build_hamiltonian(&view, &grid, g).unwrap();
            assert_eq!(h.matrix.hermitian_defect(), 0.0);
            spectra.push(dense_eigenvalues(&h.matrix));
        }
        for s in &spectra[1..] {
            for (a, b) in s.iter().zip(&spectra[0]) {
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn coarse_grid_rejected_unless_allowed() {
        let spec = DisorderSpec::example();
        let grid = Grid::new([0.0, 0.0], 2.0, 0.25).unwrap();
        let omega = DisorderRealization::generate(&spec, 5, grid.square()).unwrap();
        let view = MagneticFieldView::new(&spec, &omega);
        assert!(build_hamiltonian(&view, &grid, GaugeKind::Column).is_err());
        let opts = BuildOptions { allow_coarse: true };
        assert!(build_hamiltonian_with(&view, &grid, GaugeKind::Column, opts).is_ok());
    }

    #[test]
    fn triplet_export() {
        let grid = Grid::new([0.0, 0.0], 4.0, 1.0).unwrap();
        let h = DiscreteHamiltonian::from_phases(grid, LinkPhases::zeros(grid.n), vec![0.0; 9]);
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9 + 24);
        assert!(text.starts_with("0 0 4.0"));
    }
}
