use serde::{Deserialize, Serialize};

use crate::dynamics::{chemical_potential, State};
use crate::error::Result;
use crate::fields::ops::{grad_with, strain_rate, Parity};
use crate::material::MaterialModel;

/// Relative energy of a state with respect to a reference, and the relative dissipation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelativeEnergyReport {
    pub e_mix: f64,
    pub e_bulk: f64,
    pub e_kin: f64,
    pub e_total: f64,
    pub d_visc: f64,
    pub d_q: f64,
    pub d_eps: f64,
    pub d_cross: f64,
    pub dissipation: f64,
}

/// Relative energy of `state` (phi, q, u) with respect to `reference`
/// (psi, Q, U). Both chemical potentials are recomputed from the phase fields.
pub fn relative_energy(state: &State, reference: &State, material: &MaterialModel) -> Result<RelativeEnergyReport> {
    let grid = *state.grid();
    grid.check_same(reference.grid())?;
    material.check_stabilization()?;
    let cv = grid.cell_volume();
    let (c0, a) = (material.c0, material.stabilization);
    let phi = state.phi.data();
    let psi = reference.phi.data();
    let dphi: Vec<f64> = phi.iter().zip(psi).map(|(x, y)| x - y).collect();
    let gd = grad_with(&grid, &dphi, Parity::Even);
    let mut e_mix = 0.0;
    for i in 0..grid.cells() {
        let g2: f64 = gd.iter().map(|c| c[i] * c[i]).sum();
        let fp = material.potential.eval(psi[i])?;
        let f = material.potential.value(phi[i])?;
        e_mix += 0.5 * c0 * g2 + f - fp.value - fp.first * dphi[i] + a * dphi[i] * dphi[i];
    }
    e_mix *= cv;
    let dq: Vec<f64> = state
        .q
        .data()
        .iter()
        .zip(reference.q.data())
        .map(|(x, y)| x - y)
        .collect();
    let e_bulk = 0.5 * dq.iter().map(|x| x * x).sum::<f64>() * cv;
    let du = &state.u - &reference.u;
    let e_kin = 0.5 * du.inner(&du);

    let eta: Vec<f64> = phi.iter().map(|&s| material.eta(s)).collect();
    let sd = strain_rate(&du);
    let mut d_visc = 0.0;
    for row in &sd {
        for c in row {
            d_visc += c.iter().zip(&eta).map(|(x, e)| e * x * x).sum::<f64>();
        }
    }
    d_visc *= cv;
    let d_q = dq.iter().zip(phi).map(|(x, &s)| x * x / material.tau(s)).sum::<f64>() * cv;
    let gdq = grad_with(&grid, &dq, Parity::Even);
    let d_eps = material.eps1 * gdq.iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>() * cv;
    let mu = chemical_potential(&state.phi, material, None)?;
    let pi = chemical_potential(&reference.phi, material, None)?;
    let dmu: Vec<f64> = mu.data().iter().zip(pi.data()).map(|(x, y)| x - y).collect();
    let gmu = grad_with(&grid, &dmu, Parity::Even);
    let adq: Vec<f64> = dq.iter().zip(phi).map(|(x, &s)| material.bulk(s).0 * x).collect();
    let gadq = grad_with(&grid, &adq, Parity::Even);
    let mut d_cross = 0.0;
    for i in 0..grid.cells() {
        let n = material.n(phi[i]);
        for (gm, ga) in gmu.iter().zip(&gadq) {
            let v = n * gm[i] - ga[i];
            d_cross += v * v;
        }
    }
    d_cross *= cv;
    Ok(RelativeEnergyReport {
        e_mix,
        e_bulk,
        e_kin,
        e_total: e_mix + e_bulk + e_kin,
        d_visc,
        d_q,
        d_eps,
        d_cross,
        dissipation: d_visc + d_q + d_eps + d_cross,
    })
}
