//! Random magnetic Schrödinger operators in the plane.
//!
//! The crate builds multiscale random magnetic fields, turns them into
//! vector potentials in several gauges, discretizes the magnetic Laplacian
//! on square boxes with Peierls link phases, and runs spectral and
//! localization experiments on the result.
//!
//! ```
//! use randmag::{DisorderSpec, DisorderRealization, MagneticFieldView};
//! use randmag::discretize::{Grid, build_hamiltonian};
//! use randmag::gauges::GaugeKind;
//!
//! let spec = DisorderSpec::example();
//! let grid = Grid::new([0.0, 0.0], 2.0, 0.125).unwrap();
//! let omega = DisorderRealization::generate(&spec, 7, grid.square()).unwrap();
//! let field = MagneticFieldView::new(&spec, &omega);
//! let h = build_hamiltonian(&field, &grid, GaugeKind::Column).unwrap();
//! assert_eq!(h.dim(), 15 * 15);
//! ```

pub mod currents;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod experiments;
pub mod gauges;
pub mod geometry;
pub mod linalg;
pub mod quad;
pub mod randfield;
pub mod rng;

pub use error::{Error, Result};
pub use geometry::Square;
pub use num_complex::Complex64 as C64;
pub use randfield::{
    envelope_constants, BackgroundField, DensitySpec, DisorderRealization, DisorderSpec,
    EnvelopeConstants, MagneticFieldView, ProfileFunction, ProfileKind,
};
