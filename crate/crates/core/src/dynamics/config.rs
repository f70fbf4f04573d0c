use crate::error::{Error, Result};
use crate::fields::{Boundary, Grid};
use crate::material::{MaterialModel, Regime};

use super::init::{ScalarInit, VelocityInit};
use super::velocity::CapillaryForm;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// Relative residual target of the implicit solves.
    pub tol: f64,
    pub max_iter: usize,
    /// Bound on `|div u|_2` after projection.
    pub projection_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 500,
            projection_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub material: MaterialModel,
    pub regime: Regime,
    /// `None` selects the automatic step.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub capillary: CapillaryForm,
    /// Steps between stored states; 0 keeps only the initial and final state.
    pub output_every: usize,
    pub seed: u64,
    pub init_phi: ScalarInit,
    pub init_q: ScalarInit,
    pub init_u: VelocityInit,
    pub solver: SolverSettings,
    /// Refuse to run with `a <= c4/2`; cleared only by sensitivity experiments.
    pub enforce_stabilization: bool,
}

impl SimConfig {
    /// 64x64 periodic unit square, double well, small spinodal seed, 100 steps of `1e-4`.
    pub fn regular_default() -> SimConfig {
        SimConfig {
            grid: Grid::unit(2, 64, Boundary::Periodic).expect("valid default grid"),
            material: MaterialModel::regular_default(),
            regime: Regime::Regular,
            dt: None,
            t_end: 1e-2,
            capillary: CapillaryForm::PhiGradMu,
            output_every: 0,
            seed: 0,
            init_phi: ScalarInit::Spinodal {
                mean: 0.0,
                amplitude: 0.05,
                seed: None,
            },
            init_q: ScalarInit::Uniform(0.0),
            init_u: VelocityInit::Zero,
            solver: SolverSettings::default(),
            enforce_stabilization: true,
        }
    }

    /// Regularized degenerate model on a 48x48 periodic grid, `phi0` in `[0.3, 0.7]`.
    pub fn degenerate_default(delta: f64) -> Result<SimConfig> {
        Ok(SimConfig {
            grid: Grid::unit(2, 48, Boundary::Periodic)?,
            material: MaterialModel::degenerate_default(delta)?,
            regime: Regime::Degenerate,
            capillary: CapillaryForm::C0LaplaceGrad,
            init_phi: ScalarInit::Spinodal {
                mean: 0.5,
                amplitude: 0.2,
                seed: None,
            },
            ..SimConfig::regular_default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Precondition(format!("dt = {dt} must be positive")));
            }
            if self.t_end < dt {
                return Err(Error::Precondition(format!(
                    "t_end = {} must be at least dt = {dt}",
                    self.t_end
                )));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Precondition(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(self.material.c0 > 0.0) {
            return Err(Error::Constraint {
                assumption: "c0 > 0",
                message: format!("c0 = {}", self.material.c0),
            });
        }
        if !(self.material.eps1 >= 0.0) {
            return Err(Error::Constraint {
                assumption: "eps1 >= 0",
                message: format!("eps1 = {}", self.material.eps1),
            });
        }
        if !(self.solver.tol > 0.0 && self.solver.projection_tol > 0.0 && self.solver.max_iter > 0) {
            return Err(Error::Precondition(
                "solver tolerances and iteration cap must be positive".into(),
            ));
        }
        if self.enforce_stabilization {
            self.material.check_stabilization()?;
        }
        Ok(())
    }
}
