//! Spectral-Galerkin harness for the phase-stress subsystem without flow, on a
//! box with Neumann cosine eigenfunctions.

mod basis;
mod integrate;
mod study;
mod system;

pub use basis::{CosineBasis, Quadrature};
pub use integrate::{integrate_galerkin, GalerkinRecord, GalerkinRun};
pub use study::{coefficient_distance, convergence_study, CauchyRow, CauchyTable};
pub use system::{assemble_rhs, energy_galerkin, GalerkinEnergy, GalerkinRhs, GalerkinState, RESOLUTION_TOL};
