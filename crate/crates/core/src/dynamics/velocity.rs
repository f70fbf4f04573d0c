use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ops::{advect_velocity, grad_with, viscous_dissipation, viscous_divergence, Parity};
use crate::fields::solver::{pcg, CgOptions};
use crate::fields::{laplacian, Projector, ScalarField, Spectral, VectorField};
use crate::material::MaterialModel;

/// Discretization of the capillary force; the two differ by a gradient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapillaryForm {
    /// `-phi grad mu`, paired with conservative phase advection.
    PhiGradMu,
    /// `-c0 laplacian(phi) grad phi`.
    C0LaplaceGrad,
}

impl CapillaryForm {
    pub fn name(self) -> &'static str {
        match self {
            CapillaryForm::PhiGradMu => "phi-grad-mu",
            CapillaryForm::C0LaplaceGrad => "c0-laplace-grad",
        }
    }

    pub fn parse(s: &str) -> Option<CapillaryForm> {
        match s {
            "phi-grad-mu" => Some(CapillaryForm::PhiGradMu),
            "c0-laplace-grad" => Some(CapillaryForm::C0LaplaceGrad),
            _ => None,
        }
    }
}

pub fn capillary_force(
    phi: &ScalarField,
    mu: &ScalarField,
    form: CapillaryForm,
    material: &MaterialModel,
) -> VectorField {
    let grid = *phi.grid();
    let comps = match form {
        CapillaryForm::PhiGradMu => grad_with(&grid, mu.data(), Parity::Even)
            .into_iter()
            .map(|g| g.iter().zip(phi.data()).map(|(a, s)| -s * a).collect())
            .collect(),
        CapillaryForm::C0LaplaceGrad => {
            let lap = laplacian(phi);
            grad_with(&grid, phi.data(), Parity::Even)
                .into_iter()
                .map(|g| g.iter().zip(lap.data()).map(|(a, l)| -material.c0 * l * a).collect())
                .collect()
        }
    };
    VectorField::from_comps(grid, comps)
}

#[derive(Clone, Debug)]
pub struct VelocityStep {
    pub u: VectorField,
    pub p: ScalarField,
    /// `integral eta |D u*|^2` of the pre-projection velocity.
    pub d_visc: f64,
    pub iterations: usize,
}

pub struct VelocitySolver {
    spectral: Arc<Spectral>,
    projector: Projector,
    opts: CgOptions,
    projection_tol: f64,
}

impl VelocitySolver {
    pub fn new(spectral: Arc<Spectral>, opts: CgOptions, projection_tol: f64) -> VelocitySolver {
        VelocitySolver {
            projector: Projector::new(spectral.clone()).with_max_iter(opts.max_iter),
            spectral,
            opts,
            projection_tol,
        }
    }

    pub fn projection_tol(&self) -> f64 {
        self.projection_tol
    }

    /// Solves `(I - dt div(eta D)) u* = start - dt (u^n . grad) u^n` with
    /// `eta = eta(phi_new)`, then projects. `start` already contains `u^n` plus
    /// any explicit force increment.
    pub fn step(
        &self,
        u_old: &VectorField,
        start: &VectorField,
        phi_new: &ScalarField,
        material: &MaterialModel,
        dt: f64,
        t: f64,
    ) -> Result<VelocityStep> {
        let grid = *u_old.grid();
        grid.check_same(self.spectral.grid())?;
        let cells = grid.cells();
        let dim = grid.dim();
        let eta: Vec<f64> = phi_new.data().iter().map(|&s| material.eta(s)).collect();
        let adv = advect_velocity(u_old, u_old);
        let mut rhs = vec![0.0; dim * cells];
        for a in 0..dim {
            for i in 0..cells {
                rhs[a * cells + i] = start.comp(a)[i] - dt * adv.comp(a)[i];
            }
        }
        let split = |x: &[f64]| VectorField::from_comps(grid, x.chunks(cells).map(<[f64]>::to_vec).collect());
        let op = |x: &[f64], y: &mut [f64]| {
            let v = split(x);
            let d = viscous_divergence(&eta, &v);
            for a in 0..dim {
                for i in 0..cells {
                    y[a * cells + i] = x[a * cells + i] - dt * d.comp(a)[i];
                }
            }
        };
        let eta_mean = eta.iter().sum::<f64>() / cells as f64;
        let pre = |r: &[f64], z: &mut [f64]| {
            for (rc, zc) in r.chunks(cells).zip(z.chunks_mut(cells)) {
                zc.copy_from_slice(&self.spectral.apply(rc, |l| 1.0 / (1.0 + 0.5 * dt * eta_mean * l)));
            }
        };
        let mut x0 = Vec::with_capacity(dim * cells);
        for a in 0..dim {
            x0.extend_from_slice(start.comp(a));
        }
        let out = pcg("viscous solve", op, pre, &rhs, Some(&x0), self.opts).map_err(|e| e.at(t))?;
        let u_star = split(&out.x);
        if !u_star.is_finite() {
            return Err(Error::BlowUp {
                t,
                detail: "velocity became non-finite".into(),
            });
        }
        let d_visc = viscous_dissipation(&eta, &u_star);
        let (u, p) = self
            .projector
            .project(&u_star, self.projection_tol)
            .map_err(|e| e.at(t))?;
        Ok(VelocityStep {
            u,
            p: p.scale(1.0 / dt),
            d_visc,
            iterations: out.iterations,
        })
    }
}

/// One-shot velocity step from a state with cached `mu`: explicit capillary
/// force from `(phi, mu)`, viscous solve, projection.
pub fn step_velocity(
    state: &super::State,
    material: &MaterialModel,
    dt: f64,
    form: CapillaryForm,
) -> Result<(VectorField, ScalarField)> {
    let spectral = Arc::new(Spectral::new(state.grid()));
    let solver = VelocitySolver::new(spectral, CgOptions::default(), 1e-10);
    let f = capillary_force(&state.phi, &state.mu, form, material);
    let start = &state.u + &f.scale(dt);
    let s = solver.step(&state.u, &start, &state.phi, material, dt, state.t + dt)?;
    Ok((s.u, s.p))
}
