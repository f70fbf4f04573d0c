//! Constitutive functions: potential, mobility, viscosity, relaxation time,
//! bulk modulus and the entropy used in the degenerate regime.

mod assumptions;
mod entropy;
mod mobility;
mod potential;

pub use assumptions::{check_assumptions, AssumptionCheck, AssumptionReport};
pub use entropy::{entropy_from_mobility, limit_entropy, Entropy, EntropyValue};
pub use mobility::{regularize_mobility, Mobility, MobilityKind, ScalarLaw};
pub use potential::{
    eval_potential, regularize_potential, Derivatives, FloryHugginsConvex, Potential, PotentialKind, Profile,
    Regularized,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Regular,
    Degenerate,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Regular => "regular",
            Regime::Degenerate => "degenerate",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "regular" => Some(Regime::Regular),
            "degenerate" => Some(Regime::Degenerate),
            _ => None,
        }
    }
}

/// Bulk modulus `A` coupling the order parameter to the bulk stress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BulkModulus {
    Constant(f64),
    /// `A = alpha * n^power`; decays with the mobility root at pure phases.
    MobilityPower {
        alpha: f64,
        power: f64,
    },
}

/// All parameter functions and constants of the model.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialModel {
    pub mobility: Mobility,
    pub viscosity: ScalarLaw,
    pub relaxation: ScalarLaw,
    pub bulk: BulkModulus,
    pub potential: Potential,
    /// Interface coefficient `c0`.
    pub c0: f64,
    /// Stress diffusion `eps1`.
    pub eps1: f64,
    /// Stabilization constant `a`, required to exceed `c4 / 2`.
    pub stabilization: f64,
}

impl MaterialModel {
    /// Constant `n = eta = tau = A = 1`, double-well potential.
    pub fn regular_default() -> MaterialModel {
        let potential = Potential::DoubleWell;
        MaterialModel {
            mobility: Mobility::constant(1.0),
            viscosity: ScalarLaw::Constant(1.0),
            relaxation: ScalarLaw::Constant(1.0),
            bulk: BulkModulus::Constant(1.0),
            stabilization: potential.concavity_bound() / 2.0 + 1.0,
            potential,
            c0: 2.5e-3,
            eps1: 1e-2,
        }
    }

    /// `m = s(1-s)` and regularized Flory–Huggins with `theta_c = 2.5`, both at `delta`.
    pub fn degenerate_default(delta: f64) -> Result<MaterialModel> {
        let potential = Potential::regularized_flory_huggins(2.5, delta)?;
        Ok(MaterialModel {
            mobility: regularize_mobility(&Mobility::Degenerate, delta)?,
            viscosity: ScalarLaw::Constant(1.0),
            relaxation: ScalarLaw::Constant(1.0),
            bulk: BulkModulus::MobilityPower { alpha: 1.0, power: 3.0 },
            stabilization: potential.concavity_bound() / 2.0 + 1.0,
            potential,
            c0: 2.5e-3,
            eps1: 1e-2,
        })
    }

    pub fn n(&self, s: f64) -> f64 {
        self.mobility.n(s)
    }

    pub fn m(&self, s: f64) -> f64 {
        self.mobility.m(s)
    }

    pub fn eta(&self, s: f64) -> f64 {
        self.viscosity.value(s)
    }

    pub fn tau(&self, s: f64) -> f64 {
        self.relaxation.value(s)
    }

    /// `(A, A')` at `s`.
    pub fn bulk(&self, s: f64) -> (f64, f64) {
        bulk_with(&self.bulk, &self.mobility, s)
    }

    pub fn concavity_bound(&self) -> f64 {
        self.potential.concavity_bound()
    }

    /// Errors unless `a > c4 / 2`.
    pub fn check_stabilization(&self) -> Result<()> {
        let c4 = self.concavity_bound();
        if self.stabilization > c4 / 2.0 {
            Ok(())
        } else {
            Err(Error::Constraint {
                assumption: "a > c4/2",
                message: format!(
                    "stabilization a = {} must exceed c4/2 = {} for the {} potential",
                    self.stabilization,
                    c4 / 2.0,
                    self.potential.kind().name()
                ),
            })
        }
    }

    /// The entropy built from the (regularized) mobility.
    pub fn entropy(&self) -> Result<Entropy> {
        entropy_from_mobility(&self.mobility, 1e-4)
    }

    /// Stable textual form of every constant, used for fingerprints.
    pub fn describe(&self) -> String {
        format!(
            "mobility={:?};viscosity={:?};relaxation={:?};bulk={:?};potential={:?};c0={:?};eps1={:?};a={:?}",
            self.mobility,
            self.viscosity,
            self.relaxation,
            self.bulk,
            self.potential,
            self.c0,
            self.eps1,
            self.stabilization
        )
    }
}

pub(crate) fn bulk_with(bulk: &BulkModulus, mobility: &Mobility, s: f64) -> (f64, f64) {
    match *bulk {
        BulkModulus::Constant(a) => (a, 0.0),
        BulkModulus::MobilityPower { alpha, power } => {
            let n = mobility.n(s);
            if n <= 0.0 {
                return (0.0, 0.0);
            }
            let a = alpha * n.powf(power);
            let dn = mobility.dn(s);
            (a, alpha * power * n.powf(power - 1.0) * dn)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stabilization_exceeds_half_concavity() {
        let m = MaterialModel::regular_default();
        assert_eq!(m.stabilization, 1.5);
        m.check_stabilization().unwrap();
        let mut bad = m.clone();
        bad.stabilization = 0.4;
        assert!(matches!(bad.check_stabilization(), Err(Error::Constraint { .. })));
    }

    #[test]
    fn bulk_power_derivative_matches_fd() {
        let m = MaterialModel::degenerate_default(1e-3).unwrap();
        for s in [0.2, 0.4, 0.7] {
            let h = 1e-6;
            let fd = (m.bulk(s + h).0 - m.bulk(s - h).0) / (2.0 * h);
            assert!((fd - m.bulk(s).1).abs() < 1e-7);
        }
    }
}
