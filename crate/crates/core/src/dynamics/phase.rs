//! Coupled phase/stress update.
//!
//! With `K = a - c0 laplacian`, `g = a phi^n - F'(phi^n)` and all coefficients
//! frozen at `phi^n`, the step solves for `(mu, q)`
//!
//! ```text
//! K^{-1}(mu + g) = phi^n - dt div(phi^n u~) + dt div(n B)
//! (1 + dt/tau) q - dt eps1 laplacian q + dt A div B = q^n - dt adv(u^n, q^n)
//! ```
//!
//! where `B = n grad mu - grad(A q)` and `u~ = u^n - dt phi^n grad mu` carries
//! the capillary force into the advection. The system is symmetric positive
//! definite; it is solved by CG preconditioned with the exact inverse of its
//! constant-coefficient (mean) counterpart. `phi^{n+1}` is then formed from the
//! conservative right-hand side, so mass is conserved to round-off.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::ops::{advect_conservative, advect_skew, div_with, grad_with, Parity};
use crate::fields::solver::{pcg, CgOptions};
use crate::fields::{ScalarField, Spectral, VectorField};
use crate::material::MaterialModel;

use super::state::State;

/// Above this magnitude `phi` is considered to have blown up.
pub const BLOW_UP_BOUND: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct PhaseStep {
    pub phi: ScalarField,
    pub q: ScalarField,
    /// Chemical potential of the step, `-c0 laplacian phi^{n+1} + F'(phi^n) + a (phi^{n+1} - phi^n)`.
    pub mu: ScalarField,
    /// `B = n grad mu - grad(A q)` at the new `(mu, q)` with frozen coefficients.
    pub flux: VectorField,
    /// `u^n - dt phi^n grad mu` when the capillary force is coupled, else `None`.
    pub u_tilde: Option<VectorField>,
    pub iterations: usize,
    pub d_cross: f64,
    pub d_q: f64,
    pub d_eps: f64,
}

struct Coefficients {
    n: Vec<f64>,
    a: Vec<f64>,
    inv_tau: Vec<f64>,
    /// `phi^n` squared where the capillary force is coupled, else empty.
    w: Vec<f64>,
}

pub struct PhaseSolver {
    spectral: Arc<Spectral>,
    opts: CgOptions,
}

impl PhaseSolver {
    pub fn new(spectral: Arc<Spectral>, opts: CgOptions) -> PhaseSolver {
        PhaseSolver { spectral, opts }
    }

    fn k_inverse(&self, material: &MaterialModel, x: &[f64]) -> Vec<f64> {
        let (a, c0) = (material.stabilization, material.c0);
        self.spectral.apply(x, |l| 1.0 / (a + c0 * l))
    }

    /// Advances `(phi, q)` by `dt`. With `couple_capillary` the advecting
    /// velocity includes the implicit capillary kick `-dt phi^n grad mu`.
    pub fn step(&self, state: &State, material: &MaterialModel, dt: f64, couple_capillary: bool) -> Result<PhaseStep> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Precondition(format!("time step {dt} must be positive")));
        }
        let grid = *state.grid();
        grid.check_same(self.spectral.grid())?;
        let cells = grid.cells();
        let phi0 = state.phi.data();
        let coef = Coefficients {
            n: phi0.iter().map(|&s| material.n(s)).collect(),
            a: phi0.iter().map(|&s| material.bulk(s).0).collect(),
            inv_tau: phi0.iter().map(|&s| 1.0 / material.tau(s)).collect(),
            w: if couple_capillary {
                phi0.iter().map(|s| s * s).collect()
            } else {
                Vec::new()
            },
        };
        let eps1 = material.eps1;
        let stab = material.stabilization;
        let g: Vec<f64> = phi0
            .iter()
            .map(|&s| Ok(stab * s - material.potential.first(s)?))
            .collect::<Result<_>>()?;

        // B for a stacked (mu, q)
        let flux_of = |mu: &[f64], q: &[f64]| -> Vec<Vec<f64>> {
            let gmu = grad_with(&grid, mu, Parity::Even);
            let aq: Vec<f64> = q.iter().zip(&coef.a).map(|(x, a)| x * a).collect();
            let gaq = grad_with(&grid, &aq, Parity::Even);
            gmu.iter()
                .zip(&gaq)
                .map(|(gm, ga)| gm.iter().zip(ga).zip(&coef.n).map(|((m, a), n)| n * m - a).collect())
                .collect()
        };

        let op = |x: &[f64], y: &mut [f64]| {
            let (mu, q) = x.split_at(cells);
            let b = flux_of(mu, q);
            let nb: Vec<Vec<f64>> = b
                .iter()
                .map(|c| c.iter().zip(&coef.n).map(|(v, n)| v * n).collect())
                .collect();
            let div_nb = div_with(&grid, &nb, Parity::Odd);
            let div_b = div_with(&grid, &b, Parity::Odd);
            let kmu = self.k_inverse(material, mu);
            let gq = grad_with(&grid, q, Parity::Even);
            let lap_q = div_with(&grid, &gq, Parity::Odd);
            let (ymu, yq) = y.split_at_mut(cells);
            for i in 0..cells {
                ymu[i] = kmu[i] - dt * div_nb[i];
                yq[i] = (1.0 + dt * coef.inv_tau[i]) * q[i] - dt * eps1 * lap_q[i] + dt * coef.a[i] * div_b[i];
            }
            if !coef.w.is_empty() {
                let gmu = grad_with(&grid, mu, Parity::Even);
                let wg: Vec<Vec<f64>> = gmu
                    .iter()
                    .map(|c| c.iter().zip(&coef.w).map(|(v, w)| v * w).collect())
                    .collect();
                let d = div_with(&grid, &wg, Parity::Odd);
                for i in 0..cells {
                    ymu[i] -= dt * dt * d[i];
                }
            }
        };

        // mean-coefficient block inverse, mode by mode
        let mean = |f: &dyn Fn(usize) -> f64| (0..cells).map(f).sum::<f64>() / cells as f64;
        let nn = mean(&|i| coef.n[i] * coef.n[i]);
        let na = mean(&|i| coef.n[i] * coef.a[i]);
        let aa = mean(&|i| coef.a[i] * coef.a[i]);
        let it = mean(&|i| coef.inv_tau[i]);
        let ww = if coef.w.is_empty() { 0.0 } else { mean(&|i| coef.w[i]) };
        let c0 = material.c0;
        let lambda = self.spectral.lambda();
        let pre = |r: &[f64], z: &mut [f64]| {
            let (rm, rq) = r.split_at(cells);
            let mut sm = self.spectral.forward(rm);
            let mut sq = self.spectral.forward(rq);
            for k in 0..cells {
                let l = lambda[k];
                let a11 = 1.0 / (stab + c0 * l) + dt * nn * l + dt * dt * ww * l;
                let a12 = -dt * na * l;
                let a22 = 1.0 + dt * it + dt * (eps1 + aa) * l;
                let det = a11 * a22 - a12 * a12;
                let (x, y) = (sm[k], sq[k]);
                sm[k] = (x * a22 - y * a12) / det;
                sq[k] = (y * a11 - x * a12) / det;
            }
            let (zm, zq) = z.split_at_mut(cells);
            zm.copy_from_slice(&self.spectral.inverse(sm));
            zq.copy_from_slice(&self.spectral.inverse(sq));
        };

        let adv_phi = advect_conservative(&state.u, phi0);
        let kg = self.k_inverse(material, &g);
        let adv_q = advect_skew(&state.u, state.q.data(), Parity::Even);
        let mut rhs = vec![0.0; 2 * cells];
        for i in 0..cells {
            rhs[i] = phi0[i] - dt * adv_phi[i] - kg[i];
            rhs[cells + i] = state.q.data()[i] - dt * adv_q[i];
        }
        let mut x0 = Vec::with_capacity(2 * cells);
        x0.extend_from_slice(state.mu.data());
        x0.extend_from_slice(state.q.data());
        let out = pcg("phase-stress system", op, pre, &rhs, Some(&x0), self.opts).map_err(|e| e.at(state.t + dt))?;
        let (mu, q) = out.x.split_at(cells);

        let b = flux_of(mu, q);
        let nb: Vec<Vec<f64>> = b
            .iter()
            .map(|c| c.iter().zip(&coef.n).map(|(v, n)| v * n).collect())
            .collect();
        let div_nb = div_with(&grid, &nb, Parity::Odd);
        let mut phi = vec![0.0; cells];
        for i in 0..cells {
            phi[i] = phi0[i] - dt * adv_phi[i] + dt * div_nb[i];
        }
        let u_tilde = if couple_capillary {
            let gmu = grad_with(&grid, mu, Parity::Even);
            let wg: Vec<Vec<f64>> = gmu
                .iter()
                .map(|c| c.iter().zip(phi0).map(|(v, s)| v * s).collect())
                .collect();
            // -dt div(phi^n u~) = -dt div(phi^n u^n) + dt^2 div(phi^n phi^n grad mu)
            let phi_sq_grad: Vec<Vec<f64>> = wg
                .iter()
                .map(|c| c.iter().zip(phi0).map(|(v, s)| v * s).collect())
                .collect();
            let d2 = div_with(&grid, &phi_sq_grad, Parity::Odd);
            for i in 0..cells {
                phi[i] += dt * dt * d2[i];
            }
            let comps = state
                .u
                .comps()
                .iter()
                .zip(&wg)
                .map(|(u, f)| u.iter().zip(f).map(|(a, b)| a - dt * b).collect())
                .collect();
            Some(VectorField::from_comps(grid, comps))
        } else {
            None
        };

        let phi = ScalarField::from_vec(grid, phi);
        if let Some(bad) = phi.data().iter().find(|v| !v.is_finite() || v.abs() > BLOW_UP_BOUND) {
            return Err(Error::BlowUp {
                t: state.t + dt,
                detail: format!("phi reached {bad} (bound {BLOW_UP_BOUND})"),
            });
        }
        let q = ScalarField::from_vec(grid, q.to_vec());
        if !q.is_finite() {
            return Err(Error::BlowUp {
                t: state.t + dt,
                detail: "q became non-finite".into(),
            });
        }
        let flux = VectorField::from_comps(grid, b);
        let cv = grid.cell_volume();
        let d_cross = flux.inner(&flux);
        let d_q = q
            .data()
            .iter()
            .zip(&coef.inv_tau)
            .map(|(x, it)| x * x * it)
            .sum::<f64>()
            * cv;
        let gq = grad_with(&grid, q.data(), Parity::Even);
        let d_eps = eps1 * gq.iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>() * cv;
        Ok(PhaseStep {
            phi,
            q,
            mu: ScalarField::from_vec(grid, mu.to_vec()),
            flux,
            u_tilde,
            iterations: out.iterations,
            d_cross,
            d_q,
            d_eps,
        })
    }
}

/// One-shot phase step; prefer a cached [`PhaseSolver`] inside time loops.
pub fn step_phi_q(
    state: &State,
    material: &MaterialModel,
    dt: f64,
    couple_capillary: bool,
) -> Result<(ScalarField, ScalarField)> {
    let solver = PhaseSolver::new(Arc::new(Spectral::new(state.grid())), CgOptions::default());
    let s = solver.step(state, material, dt, couple_capillary)?;
    Ok((s.phi, s.q))
}
