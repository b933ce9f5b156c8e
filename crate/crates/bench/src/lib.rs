//! Shared fixtures for the benchmarks.

use randmag::discretize::{build_hamiltonian, DiscreteHamiltonian, Grid};
use randmag::gauges::GaugeKind;
use randmag::{DisorderRealization, DisorderSpec, MagneticFieldView};

/// The example disorder model on a box of the given side, fixed seed.
pub fn example_field(side: f64, h: f64) -> (DisorderSpec, DisorderRealization, Grid) {
    let spec = DisorderSpec::example();
    let grid = Grid::new([0.0, 0.0], side, h).expect("grid");
    let omega = DisorderRealization::generate(&spec, 1, grid.square()).expect("realization");
    (spec, omega, grid)
}

/// Column-gauge Hamiltonian of [`example_field`].
pub fn example_hamiltonian(side: f64, h: f64) -> DiscreteHamiltonian {
    let (spec, omega, grid) = example_field(side, h);
    let view = MagneticFieldView::new(&spec, &omega);
    build_hamiltonian(&view, &grid, GaugeKind::Column).expect("hamiltonian")
}
