use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::fields::ScalarField;
use crate::material::MaterialModel;

/// Phase bounds and entropy along a degenerate-regime trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub min_phi: f64,
    pub max_phi: f64,
    /// `max(-min phi, max phi - 1, 0)`.
    pub overshoot: f64,
    pub tol0: f64,
    /// Largest measure of `{phi <= tol0} U {phi >= 1 - tol0}` over the stored states.
    pub near_degenerate_measure: f64,
    /// `integral G(phi)` per step; empty when the mobility admits no entropy.
    pub entropy: Vec<f64>,
    /// `min(min phi, 1 - max phi)` per step.
    pub separation: Vec<f64>,
    /// Smallest separation over the run.
    pub kappa: f64,
}

impl BoundsReport {
    pub fn entropy_finite(&self) -> bool {
        self.entropy.iter().all(|g| g.is_finite())
    }
}

/// Cell-count measure of `{phi <= tol0} U {phi >= 1 - tol0}`.
pub fn near_degenerate_measure(phi: &ScalarField, tol0: f64) -> f64 {
    let count = phi.data().iter().filter(|&&s| s <= tol0 || s >= 1.0 - tol0).count();
    count as f64 * phi.grid().cell_volume()
}

pub fn bounds_report(traj: &Trajectory, material: &MaterialModel, tol0: f64) -> Result<BoundsReport> {
    let mut min_phi = f64::INFINITY;
    let mut max_phi = f64::NEG_INFINITY;
    let mut separation = Vec::with_capacity(traj.records.len());
    for r in &traj.records {
        min_phi = min_phi.min(r.min_phi);
        max_phi = max_phi.max(r.max_phi);
        separation.push(r.min_phi.min(1.0 - r.max_phi));
    }
    for s in &traj.states {
        min_phi = min_phi.min(s.phi.min());
        max_phi = max_phi.max(s.phi.max());
    }
    let near_degenerate_measure = traj
        .states
        .iter()
        .map(|s| near_degenerate_measure(&s.phi, tol0))
        .fold(0.0, f64::max);
    let entropy = if traj.records.iter().all(|r| r.entropy.is_some()) {
        traj.records.iter().filter_map(|r| r.entropy).collect()
    } else {
        match material.entropy() {
            Ok(g) => traj
                .states
                .iter()
                .map(|s| s.phi.data().iter().map(|&x| g.value(x)).sum::<f64>() * s.grid().cell_volume())
                .collect(),
            Err(_) => Vec::new(),
        }
    };
    Ok(BoundsReport {
        min_phi,
        max_phi,
        overshoot: (-min_phi).max(max_phi - 1.0).max(0.0),
        tol0,
        near_degenerate_measure,
        entropy,
        kappa: min_phi.min(1.0 - max_phi),
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Boundary, Grid};

    #[test]
    fn single_cell_measure() {
        let g = Grid::unit(2, 32, Boundary::Periodic).unwrap();
        let mut phi = ScalarField::constant(g, 0.5);
        phi.data_mut()[17] = 0.999;
        assert!((near_degenerate_measure(&phi, 1e-2) - 1.0 / 1024.0).abs() < 1e-15);
        assert!((0.0..=g.volume()).contains(&near_degenerate_measure(&phi, 0.6)));
    }
}
