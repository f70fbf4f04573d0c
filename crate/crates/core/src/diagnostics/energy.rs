use serde::{Deserialize, Serialize};

use crate::dynamics::{cross_flux, State};
use crate::error::Result;
use crate::fields::ops::{grad_with, viscous_dissipation, Parity};
use crate::fields::ScalarField;
use crate::material::MaterialModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_mix: f64,
    pub e_bulk: f64,
    pub e_kin: f64,
    pub e_total: f64,
    pub d_cross: f64,
    pub d_q: f64,
    pub d_eps: f64,
    pub d_visc: f64,
}

impl EnergyBreakdown {
    pub fn dissipation(&self) -> f64 {
        self.d_cross + self.d_q + self.d_eps + self.d_visc
    }
}

/// `integral c0/2 |grad phi|^2 + F(phi)`.
pub fn mixing_energy(phi: &ScalarField, material: &MaterialModel) -> Result<f64> {
    let grid = phi.grid();
    let g = grad_with(grid, phi.data(), Parity::Even);
    let mut total = 0.0;
    for (i, &s) in phi.data().iter().enumerate() {
        let grad2: f64 = g.iter().map(|c| c[i] * c[i]).sum();
        total += 0.5 * material.c0 * grad2 + material.potential.value(s)?;
    }
    Ok(total * grid.cell_volume())
}

/// Energy and instantaneous dissipation of `state`, using its cached `mu`.
pub fn energy(state: &State, material: &MaterialModel) -> Result<EnergyBreakdown> {
    let grid = state.grid();
    let cv = grid.cell_volume();
    let e_mix = mixing_energy(&state.phi, material)?;
    let e_bulk = 0.5 * state.q.inner(&state.q);
    let e_kin = 0.5 * state.u.inner(&state.u);
    let b = cross_flux(&state.phi, &state.mu, &state.q, material);
    let d_cross = b.inner(&b);
    let d_q = state
        .q
        .data()
        .iter()
        .zip(state.phi.data())
        .map(|(q, &s)| q * q / material.tau(s))
        .sum::<f64>()
        * cv;
    let gq = grad_with(grid, state.q.data(), Parity::Even);
    let d_eps = material.eps1 * gq.iter().flat_map(|c| c.iter()).map(|x| x * x).sum::<f64>() * cv;
    let eta: Vec<f64> = state.phi.data().iter().map(|&s| material.eta(s)).collect();
    let d_visc = viscous_dissipation(&eta, &state.u);
    Ok(EnergyBreakdown {
        e_mix,
        e_bulk,
        e_kin,
        e_total: e_mix + e_bulk + e_kin,
        d_cross,
        d_q,
        d_eps,
        d_visc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Boundary, Grid, VectorField};
    use crate::material::Potential;
    use std::f64::consts::PI;

    fn state(g: Grid, phi: ScalarField, m: &MaterialModel) -> State {
        State::new(0.0, phi, ScalarField::zeros(g), VectorField::zeros(g), m).unwrap()
    }

    #[test]
    fn constant_states() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 16, Boundary::Periodic).unwrap();
        let e1 = energy(&state(g, ScalarField::constant(g, 1.0), &m), &m).unwrap();
        assert_eq!(e1.e_total, 0.0);
        let e0 = energy(&state(g, ScalarField::zeros(g), &m), &m).unwrap();
        assert!((e0.e_total - 0.25).abs() < 1e-15);
        assert_eq!(e0.dissipation(), 0.0);
    }

    #[test]
    fn gradient_energy_of_cosine() {
        let mut m = MaterialModel::regular_default();
        m.c0 = 1.0;
        m.potential = Potential::Zero;
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let g = Grid::unit(2, n, Boundary::Periodic).unwrap();
            let phi = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
            let e = energy(&state(g, phi, &m), &m).unwrap();
            errs.push((e.e_mix - PI * PI).abs());
        }
        assert!(errs[2] < 1e-2);
        assert!((errs[0] / errs[1]).log2() > 1.9);
    }

    #[test]
    fn parts_add_up_and_are_nonnegative() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 16, Boundary::Neumann).unwrap();
        let phi = ScalarField::from_fn(g, |x| 0.4 * (3.0 * x[0]).cos() * (2.0 * x[1]).sin());
        let q = ScalarField::from_fn(g, |x| x[0] - x[1]);
        let u = VectorField::from_fn(g, |x| [x[1] * (1.0 - x[1]), 0.2 * x[0], 0.0]);
        let s = State::new(0.0, phi, q, u, &m).unwrap();
        let e = energy(&s, &m).unwrap();
        assert_eq!(e.e_total, e.e_mix + e.e_bulk + e.e_kin);
        for d in [e.d_cross, e.d_q, e.d_eps, e.d_visc] {
            assert!(d > 0.0);
        }
    }
}
