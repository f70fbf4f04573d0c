use crate::error::{Error, Result};
use crate::fields::ops::{grad_with, Parity};
use crate::fields::{laplacian, Grid, ScalarField, VectorField};
use crate::material::MaterialModel;

/// One time slice with the chemical potential cached from `phi`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub phi: ScalarField,
    pub q: ScalarField,
    pub u: VectorField,
    pub p: ScalarField,
    pub mu: ScalarField,
}

impl State {
    /// Builds a state at time `t` with zero pressure and `mu` computed from `phi`.
    pub fn new(t: f64, phi: ScalarField, q: ScalarField, u: VectorField, material: &MaterialModel) -> Result<State> {
        let grid = *phi.grid();
        grid.check_same(q.grid())?;
        grid.check_same(u.grid())?;
        for (name, ok) in [("phi", phi.is_finite()), ("q", q.is_finite()), ("u", u.is_finite())] {
            if !ok {
                return Err(Error::Precondition(format!("initial {name} has non-finite values")));
            }
        }
        let mu = chemical_potential(&phi, material, None)?;
        Ok(State {
            t,
            p: ScalarField::zeros(grid),
            phi,
            q,
            u,
            mu,
        })
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    /// Recomputes the cached chemical potential.
    pub fn refresh_mu(&mut self, material: &MaterialModel) -> Result<()> {
        self.mu = chemical_potential(&self.phi, material, None)?;
        Ok(())
    }
}

/// `mu = -c0 laplacian(phi) + F'(phi)`; with `phi_old`, the linearly stabilized
/// form `-c0 laplacian(phi) + F'(phi_old) + a (phi - phi_old)` used by the step.
pub fn chemical_potential(
    phi: &ScalarField,
    material: &MaterialModel,
    phi_old: Option<&ScalarField>,
) -> Result<ScalarField> {
    let lap = laplacian(phi);
    let c0 = material.c0;
    let data = match phi_old {
        None => phi
            .data()
            .iter()
            .zip(lap.data())
            .map(|(&s, &l)| Ok(-c0 * l + material.potential.first(s)?))
            .collect::<Result<Vec<_>>>()?,
        Some(old) => {
            phi.grid().check_same(old.grid())?;
            let a = material.stabilization;
            phi.data()
                .iter()
                .zip(old.data())
                .zip(lap.data())
                .map(|((&s, &s0), &l)| Ok(-c0 * l + material.potential.first(s0)? + a * (s - s0)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(ScalarField::from_vec(*phi.grid(), data))
}

/// `B = n(phi) grad mu - grad(A(phi) q)`, the combined flux whose square is dissipated.
pub fn cross_flux(phi: &ScalarField, mu: &ScalarField, q: &ScalarField, material: &MaterialModel) -> VectorField {
    let grid = *phi.grid();
    let n: Vec<f64> = phi.data().iter().map(|&s| material.n(s)).collect();
    let aq: Vec<f64> = phi
        .data()
        .iter()
        .zip(q.data())
        .map(|(&s, &qq)| material.bulk(s).0 * qq)
        .collect();
    let gmu = grad_with(&grid, mu.data(), Parity::Even);
    let gaq = grad_with(&grid, &aq, Parity::Even);
    let comps = gmu
        .iter()
        .zip(&gaq)
        .map(|(gm, ga)| gm.iter().zip(ga).zip(&n).map(|((m, a), nn)| nn * m - a).collect())
        .collect();
    VectorField::from_comps(grid, comps)
}

/// Phase flux `m(phi) grad mu - n(phi) grad(A(phi) q) = n(phi) B`, evaluated
/// with the cached `mu`.
pub fn flux_phi(state: &State, material: &MaterialModel) -> VectorField {
    let b = cross_flux(&state.phi, &state.mu, &state.q, material);
    let n: Vec<f64> = state.phi.data().iter().map(|&s| material.n(s)).collect();
    b.times(&n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{gradient, Boundary};
    use crate::material::BulkModulus;
    use std::f64::consts::PI;

    #[test]
    fn mu_vanishes_at_wells_and_origin() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 16, Boundary::Periodic).unwrap();
        for v in [1.0, -1.0, 0.0] {
            let mu = chemical_potential(&ScalarField::constant(g, v), &m, None).unwrap();
            assert_eq!(mu.max_abs(), 0.0);
        }
    }

    #[test]
    fn linearized_mu_of_cosine() {
        let mut m = MaterialModel::regular_default();
        m.c0 = 0.01;
        let n = 256;
        let g = Grid::unit(1, n, Boundary::Periodic).unwrap();
        let eps = 1e-4;
        let phi = ScalarField::from_fn(g, |x| eps * (2.0 * PI * x[0]).cos());
        let mu = chemical_potential(&phi, &m, None).unwrap();
        let factor = m.c0 * (2.0 * PI).powi(2) - 1.0;
        for i in 0..n {
            let expect = factor * phi.data()[i];
            // O(h^2) from the stencil, O(eps^3) from the cubic
            assert!((mu.data()[i] - expect).abs() < 1e-4 * eps);
        }
    }

    #[test]
    fn stabilized_form_reduces_when_equal() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 8, Boundary::Neumann).unwrap();
        let phi = ScalarField::from_fn(g, |x| 0.3 * (3.0 * x[0]).sin() * x[1]);
        let a = chemical_potential(&phi, &m, None).unwrap();
        let b = chemical_potential(&phi, &m, Some(&phi)).unwrap();
        assert!((&a - &b).max_abs() < 1e-15);
    }

    #[test]
    fn flux_matches_term_by_term() {
        let mut m = MaterialModel::degenerate_default(1e-2).unwrap();
        m.bulk = BulkModulus::MobilityPower { alpha: 0.7, power: 3.0 };
        let g = Grid::unit(2, 32, Boundary::Periodic).unwrap();
        let phi = ScalarField::from_fn(g, |x| 0.5 + 0.2 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let q = ScalarField::from_fn(g, |x| (2.0 * PI * (x[0] - x[1])).cos());
        let state = State::new(0.0, phi.clone(), q.clone(), VectorField::zeros(g), &m).unwrap();
        let flux = flux_phi(&state, &m);
        let mobility = phi.map(|s| m.m(s));
        let gmu = gradient(&state.mu);
        let aq = phi.zip_map(&q, |s, qq| m.bulk(s).0 * qq);
        let gaq = gradient(&aq);
        for a in 0..2 {
            for i in 0..g.cells() {
                let n = m.n(phi.data()[i]);
                let expect = mobility.data()[i] * gmu.comp(a)[i] - n * gaq.comp(a)[i];
                assert!((flux.comp(a)[i] - expect).abs() < 1e-13 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn flux_zero_for_uniform_state() {
        let m = MaterialModel::regular_default();
        let g = Grid::unit(2, 8, Boundary::Periodic).unwrap();
        let s = State::new(
            0.0,
            ScalarField::constant(g, 0.3),
            ScalarField::zeros(g),
            VectorField::zeros(g),
            &m,
        )
        .unwrap();
        assert_eq!(flux_phi(&s, &m).max_abs(), 0.0);
    }
}
