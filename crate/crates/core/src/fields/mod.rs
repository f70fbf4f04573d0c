//! Grids, fields, difference operators and the linear solvers built on them.

mod field;
mod grid;
pub mod ops;
mod projection;
mod snapshot;
pub mod solver;
pub mod spectral;

pub use field::{ScalarField, VectorField};
pub use grid::{Boundary, Grid};
pub use ops::{divergence, gradient, integrate, laplacian};
pub use projection::{project_divergence_free, Projector};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};
pub use spectral::Spectral;
