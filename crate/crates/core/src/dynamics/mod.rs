//! Time stepping of the coupled phase, stress and velocity equations.

mod config;
mod init;
mod phase;
mod simulate;
mod state;
mod velocity;

pub use config::{SimConfig, SolverSettings};
pub use init::{
    band_limited_noise, taylor_green, unstable_mode_perturbation, ModePerturbation, ScalarInit, VelocityInit,
    SPINODAL_BAND,
};
pub use phase::{step_phi_q, PhaseSolver, PhaseStep, BLOW_UP_BOUND};
pub use simulate::{auto_dt, dt_max, simulate, Simulation, StepRecord, Trajectory, CSV_HEADER};
pub use state::{chemical_potential, cross_flux, flux_phi, State};
pub use velocity::{capillary_force, step_velocity, CapillaryForm, VelocitySolver, VelocityStep};
