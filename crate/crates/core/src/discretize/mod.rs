//! Grids, Peierls link phases and the discrete magnetic Hamiltonian.

mod grid;
mod hamiltonian;
mod links;

pub use grid::{Axis, Edge, Grid, NODE_CAP};
pub use hamiltonian::{build_hamiltonian, build_hamiltonian_with, BuildOptions, DiscreteHamiltonian};
pub use links::{link_phases, LinkPhases};
