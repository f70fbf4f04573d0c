use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::MaterialModel;

use super::basis::{project_values, synthesize, synthesize_grad, CosineBasis, Quadrature};

/// Coefficients of `phi_m`, `mu_m` and `q_m` in the cosine basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinState {
    pub t: f64,
    pub phi: Vec<f64>,
    pub mu: Vec<f64>,
    pub q: Vec<f64>,
}

impl GalerkinState {
    pub fn zeros(m: usize) -> GalerkinState {
        GalerkinState {
            t: 0.0,
            phi: vec![0.0; m],
            mu: vec![0.0; m],
            q: vec![0.0; m],
        }
    }

    /// `mu` is filled in from `phi`.
    pub fn new(basis: &CosineBasis, material: &MaterialModel, phi: Vec<f64>, q: Vec<f64>) -> Result<GalerkinState> {
        let m = basis.size();
        if phi.len() != m || q.len() != m {
            return Err(Error::Precondition(format!(
                "coefficient vectors of length {} and {} for {m} modes",
                phi.len(),
                q.len()
            )));
        }
        let mu = chemical_potential_coeffs(basis.quadrature(), basis, material, &phi)?;
        Ok(GalerkinState { t: 0.0, phi, mu, q })
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().chain(&self.mu).chain(&self.q).all(|x| x.is_finite())
    }
}

/// Time derivatives of the phase and stress coefficients, and the algebraic `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinRhs {
    pub dphi: Vec<f64>,
    pub dq: Vec<f64>,
    pub mu: Vec<f64>,
    /// Dissipation rate of the discrete energy.
    pub dissipation: f64,
}

/// Discrete energy `E_m` and the integrals of its dissipation rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinEnergy {
    pub e_mix: f64,
    pub e_bulk: f64,
    pub e_total: f64,
    pub d_cross: f64,
    pub d_q: f64,
    pub d_eps: f64,
}

impl GalerkinEnergy {
    pub fn dissipation(&self) -> f64 {
        self.d_cross + self.d_q + self.d_eps
    }
}

/// Two-level agreement required of the quadrature.
pub const RESOLUTION_TOL: f64 = 1e-6;

pub(crate) fn check_model(material: &MaterialModel) -> Result<()> {
    if material.mobility.is_degenerate() {
        return Err(Error::Precondition(
            "the Galerkin harness needs a positive (regular or regularized) mobility".into(),
        ));
    }
    Ok(())
}

fn chemical_potential_coeffs(
    q: &Quadrature,
    basis: &CosineBasis,
    material: &MaterialModel,
    phi: &[f64],
) -> Result<Vec<f64>> {
    let phi_n = synthesize(q, phi);
    let fp = phi_n
        .iter()
        .map(|&s| material.potential.first(s))
        .collect::<Result<Vec<_>>>()?;
    let mut mu = project_values(q, &fp);
    for ((m, l), p) in mu.iter_mut().zip(basis.eigenvalues()).zip(phi) {
        *m += material.c0 * l * p;
    }
    Ok(mu)
}

fn rhs_on(
    q: &Quadrature,
    basis: &CosineBasis,
    material: &MaterialModel,
    phi: &[f64],
    qc: &[f64],
) -> Result<GalerkinRhs> {
    let dim = basis.dim();
    let lam = basis.eigenvalues();
    let mu = chemical_potential_coeffs(q, basis, material, phi)?;
    let phi_n = synthesize(q, phi);
    let gphi = synthesize_grad(q, dim, phi);
    let q_n = synthesize(q, qc);
    let gq = synthesize_grad(q, dim, qc);
    let gmu = synthesize_grad(q, dim, &mu);
    let nodes = q.nodes();
    let mut n = vec![0.0; nodes];
    let mut a = vec![0.0; nodes];
    let mut da = vec![0.0; nodes];
    let mut relax = vec![0.0; nodes];
    for i in 0..nodes {
        let s = phi_n[i];
        n[i] = material.n(s);
        (a[i], da[i]) = material.bulk(s);
        relax[i] = q_n[i] / material.tau(s);
    }
    // B = n grad mu - grad(A q)
    let b: Vec<Vec<f64>> = (0..dim)
        .map(|ax| {
            (0..nodes)
                .map(|i| n[i] * gmu[ax][i] - (da[i] * gphi[ax][i] * q_n[i] + a[i] * gq[ax][i]))
                .collect()
        })
        .collect();
    let mut dphi = vec![0.0; basis.size()];
    let mut dq = vec![0.0; basis.size()];
    for j in 0..basis.size() {
        let (psi, gpsi) = (&q.values[j], &q.grads[j]);
        let mut sp = 0.0;
        let mut sq = 0.0;
        for i in 0..nodes {
            let mut bn = 0.0;
            let mut bga = 0.0;
            for ax in 0..dim {
                bn += b[ax][i] * gpsi[ax][i];
                // grad(A psi_j) = A' psi_j grad phi + A grad psi_j
                bga += b[ax][i] * (da[i] * psi[i] * gphi[ax][i] + a[i] * gpsi[ax][i]);
            }
            sp -= n[i] * bn;
            sq += bga - relax[i] * psi[i];
        }
        dphi[j] = sp * q.weight;
        dq[j] = sq * q.weight - material.eps1 * lam[j] * qc[j];
    }
    let mut d_cross = 0.0;
    let mut d_q = 0.0;
    for i in 0..nodes {
        d_cross += (0..dim).map(|ax| b[ax][i] * b[ax][i]).sum::<f64>();
        d_q += relax[i] * q_n[i];
    }
    let d_eps = material.eps1 * lam.iter().zip(qc).map(|(l, c)| l * c * c).sum::<f64>();
    Ok(GalerkinRhs {
        dphi,
        dq,
        mu,
        dissipation: (d_cross + d_q) * q.weight + d_eps,
    })
}

/// Right-hand side on the working quadrature, without the resolution check.
pub(crate) fn rhs_unchecked(
    basis: &CosineBasis,
    material: &MaterialModel,
    phi: &[f64],
    q: &[f64],
) -> Result<GalerkinRhs> {
    rhs_on(basis.quadrature(), basis, material, phi, q)
}

/// Largest two-level difference of the right-hand side, relative to its size.
pub(crate) fn resolution_defect(
    basis: &CosineBasis,
    material: &MaterialModel,
    phi: &[f64],
    q: &[f64],
) -> Result<(GalerkinRhs, f64)> {
    let coarse = rhs_on(basis.quadrature(), basis, material, phi, q)?;
    let fine = rhs_on(basis.fine_quadrature(), basis, material, phi, q)?;
    let scale = coarse
        .dphi
        .iter()
        .chain(&coarse.dq)
        .chain(&coarse.mu)
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let diff = coarse
        .dphi
        .iter()
        .zip(&fine.dphi)
        .chain(coarse.dq.iter().zip(&fine.dq))
        .chain(coarse.mu.iter().zip(&fine.mu))
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok((coarse, diff / scale))
}

/// Projected phase and stress equations with `u = 0`; `mu` solves the projected
/// constraint. Fails if the nonlinear integrals are under-resolved.
pub fn assemble_rhs(state: &GalerkinState, basis: &CosineBasis, material: &MaterialModel) -> Result<GalerkinRhs> {
    check_model(material)?;
    let (rhs, defect) = resolution_defect(basis, material, &state.phi, &state.q)?;
    if defect > RESOLUTION_TOL {
        return Err(Error::QuadratureUnderResolved {
            difference: defect,
            threshold: RESOLUTION_TOL,
        });
    }
    Ok(rhs)
}

pub fn energy_galerkin(state: &GalerkinState, basis: &CosineBasis, material: &MaterialModel) -> Result<GalerkinEnergy> {
    let q = basis.quadrature();
    let lam = basis.eigenvalues();
    let grad2: f64 = lam.iter().zip(&state.phi).map(|(l, c)| l * c * c).sum();
    let phi_n = synthesize(q, &state.phi);
    let mut f = 0.0;
    for &s in &phi_n {
        f += material.potential.value(s)?;
    }
    let e_mix = 0.5 * material.c0 * grad2 + f * q.weight;
    let e_bulk = 0.5 * state.q.iter().map(|c| c * c).sum::<f64>();
    let rhs = rhs_unchecked(basis, material, &state.phi, &state.q)?;
    let q_n = synthesize(q, &state.q);
    let d_q = q_n
        .iter()
        .zip(&phi_n)
        .map(|(v, &s)| v * v / material.tau(s))
        .sum::<f64>()
        * q.weight;
    let d_eps = material.eps1 * lam.iter().zip(&state.q).map(|(l, c)| l * c * c).sum::<f64>();
    Ok(GalerkinEnergy {
        e_mix,
        e_bulk,
        e_total: e_mix + e_bulk,
        d_cross: rhs.dissipation - d_q - d_eps,
        d_q,
        d_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::mixing_energy;
    use crate::material::{BulkModulus, Potential};

    fn linear_material() -> MaterialModel {
        let mut m = MaterialModel::regular_default();
        m.potential = Potential::Zero;
        m.bulk = BulkModulus::Constant(0.0);
        m
    }

    #[test]
    fn zero_state_has_zero_rhs() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 10).unwrap();
        let m = MaterialModel::regular_default();
        let s = GalerkinState::new(&b, &m, vec![0.0; 10], vec![0.0; 10]).unwrap();
        let r = assemble_rhs(&s, &b, &m).unwrap();
        assert!(r.dphi.iter().chain(&r.dq).chain(&r.mu).all(|&x| x == 0.0));
        let e = energy_galerkin(&s, &b, &m).unwrap();
        assert!((e.e_total - 0.25).abs() < 1e-14);
    }

    #[test]
    fn constant_mode_relaxes() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 1).unwrap();
        let mut m = MaterialModel::regular_default();
        m.relaxation = crate::material::ScalarLaw::Constant(0.5);
        let s = GalerkinState::new(&b, &m, vec![0.3], vec![0.8]).unwrap();
        let r = assemble_rhs(&s, &b, &m).unwrap();
        assert!(r.dphi[0].abs() < 1e-15);
        assert!((r.dq[0] + 0.8 / 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_case_is_biharmonic() {
        let b = CosineBasis::new(2, &[1.0, 2.0], 9).unwrap();
        let m = linear_material();
        let phi: Vec<f64> = (0..9).map(|j| 0.1 + 0.05 * j as f64).collect();
        let s = GalerkinState::new(&b, &m, phi.clone(), vec![0.0; 9]).unwrap();
        let r = assemble_rhs(&s, &b, &m).unwrap();
        for j in 0..9 {
            let l = b.eigenvalues()[j];
            assert!((r.dphi[j] + m.c0 * l * l * phi[j]).abs() < 1e-12 * (1.0 + l * l));
        }
    }

    #[test]
    fn mode_energy_identity() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 6).unwrap();
        let m = linear_material();
        let mut phi = vec![0.0; 6];
        phi[1] = 0.4;
        let s = GalerkinState::new(&b, &m, phi, vec![0.0; 6]).unwrap();
        let e = energy_galerkin(&s, &b, &m).unwrap();
        assert!((e.e_mix - 0.5 * m.c0 * b.eigenvalues()[1] * 0.16).abs() < 1e-14);
    }

    #[test]
    fn energy_rate_equals_minus_dissipation() {
        // dE/dt = <mu, dphi> + <q, dq> must equal -D for the projected system
        let b = CosineBasis::new(2, &[1.0, 1.0], 12).unwrap();
        let m = MaterialModel::regular_default();
        let phi: Vec<f64> = (0..12)
            .map(|j| 0.2 * ((j * 7 % 5) as f64 - 2.0) / (1.0 + j as f64))
            .collect();
        let q: Vec<f64> = (0..12).map(|j| 0.1 * ((j * 3 % 4) as f64 - 1.5)).collect();
        let s = GalerkinState::new(&b, &m, phi, q.clone()).unwrap();
        let r = assemble_rhs(&s, &b, &m).unwrap();
        let rate: f64 = r.mu.iter().zip(&r.dphi).map(|(a, c)| a * c).sum::<f64>()
            + q.iter().zip(&r.dq).map(|(a, c)| a * c).sum::<f64>();
        assert!(
            (rate + r.dissipation).abs() < 1e-12 * (1.0 + r.dissipation),
            "{rate} vs {}",
            r.dissipation
        );
        assert!(r.dissipation > 0.0);
    }

    #[test]
    fn grid_energy_of_reconstruction() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 10).unwrap();
        let m = MaterialModel::regular_default();
        let phi: Vec<f64> = (0..10).map(|j| 0.3 / (1.0 + j as f64)).collect();
        let s = GalerkinState::new(&b, &m, phi.clone(), vec![0.0; 10]).unwrap();
        let e = energy_galerkin(&s, &b, &m).unwrap();
        let mut bulk_only = m.clone();
        bulk_only.c0 = 0.0;
        let f_part = energy_galerkin(&s, &b, &bulk_only).unwrap().e_mix;
        let mut errs = Vec::new();
        for n in [32, 64, 128] {
            let field = b.reconstruct(&phi, n).unwrap();
            // potential part is exact for polynomial integrands
            assert!((mixing_energy(&field, &bulk_only).unwrap() - f_part).abs() < 1e-8);
            errs.push((mixing_energy(&field, &m).unwrap() - e.e_mix).abs());
        }
        assert!((errs[0] / errs[1]).log2() > 1.8 && (errs[1] / errs[2]).log2() > 1.8);
    }

    #[test]
    fn under_resolved_integrand_is_detected() {
        let b = CosineBasis::new(1, &[1.0], 4).unwrap();
        let m = MaterialModel::degenerate_default(1e-3).unwrap();
        // steep data drives the logarithmic potential off the rule's exactness range
        let s = GalerkinState {
            t: 0.0,
            phi: vec![0.5, 0.3, 0.05, 0.02],
            mu: vec![0.0; 4],
            q: vec![0.0; 4],
        };
        assert!(matches!(
            assemble_rhs(&s, &b, &m),
            Err(Error::QuadratureUnderResolved { .. })
        ));
        let degenerate = MaterialModel {
            mobility: crate::material::Mobility::Degenerate,
            ..m
        };
        assert!(matches!(assemble_rhs(&s, &b, &degenerate), Err(Error::Precondition(_))));
    }
}
