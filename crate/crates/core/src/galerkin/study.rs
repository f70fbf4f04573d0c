use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::MaterialModel;

use super::basis::CosineBasis;
use super::integrate::{integrate_galerkin, GalerkinRun};
use super::system::GalerkinState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub m_coarse: usize,
    pub m_fine: usize,
    /// `|phi_coarse - phi_fine|_{L^2}` at the final time.
    pub difference: f64,
}

#[derive(Clone, Debug)]
pub struct CauchyTable {
    pub rows: Vec<CauchyRow>,
    pub monotone: bool,
    pub runs: Vec<(usize, GalerkinRun)>,
}

/// `L^2` distance of two expansions, exact by orthonormality.
pub fn coefficient_distance(a: &CosineBasis, ca: &[f64], b: &CosineBasis, cb: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (j, k) in a.modes().iter().enumerate() {
        let other = b.position(*k).map_or(0.0, |i| cb[i]);
        sum += (ca[j] - other).powi(2);
    }
    for (i, k) in b.modes().iter().enumerate() {
        if a.position(*k).is_none() {
            sum += cb[i] * cb[i];
        }
    }
    sum.sqrt()
}

/// Projects the shared initial data onto each basis, integrates, and tabulates
/// the distance between consecutive mode counts at `t_end`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    m_list: &[usize],
    dim: usize,
    len: &[f64],
    phi0: impl Fn(&[f64]) -> f64 + Sync,
    q0: impl Fn(&[f64]) -> f64 + Sync,
    material: &MaterialModel,
    t_end: f64,
    rtol: f64,
) -> Result<CauchyTable> {
    if m_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("mode counts must increase".into()));
    }
    use rayon::prelude::*;
    let results: Vec<Result<(usize, CosineBasis, GalerkinRun)>> = m_list
        .par_iter()
        .map(|&m| {
            let basis = CosineBasis::new(dim, len, m)?;
            let kmax = basis.modes().iter().flat_map(|k| k.iter()).max().copied().unwrap_or(0);
            let pts = (8 * (kmax + 1)).max(64);
            let phi = basis.project_fn(&phi0, pts);
            let q = basis.project_fn(&q0, pts);
            let init = GalerkinState::new(&basis, material, phi, q)?;
            let run = integrate_galerkin(&init, &basis, material, t_end, rtol, 1)?;
            Ok((m, basis, run))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<CauchyRow> = results
        .windows(2)
        .map(|w| CauchyRow {
            m_coarse: w[0].0,
            m_fine: w[1].0,
            difference: coefficient_distance(&w[0].1, &w[0].2.final_state().phi, &w[1].1, &w[1].2.final_state().phi),
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].difference <= w[0].difference);
    Ok(CauchyTable {
        rows,
        monotone,
        runs: results.into_iter().map(|(m, _, r)| (m, r)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{BulkModulus, Potential};
    use std::f64::consts::PI;

    #[test]
    fn distance_matches_direct_reconstruction() {
        let a = CosineBasis::new(2, &[1.0, 1.0], 4).unwrap();
        let b = CosineBasis::new(2, &[1.0, 1.0], 9).unwrap();
        let ca = vec![0.1, 0.2, -0.3, 0.05];
        let cb: Vec<f64> = (0..9).map(|j| 0.02 * j as f64).collect();
        let fa = a.reconstruct(&ca, 40).unwrap();
        let fb = b.reconstruct(&cb, 40).unwrap();
        let direct = (&fa - &fb).norm_l2();
        assert!((coefficient_distance(&a, &ca, &b, &cb) - direct).abs() < 1e-12);
    }

    #[test]
    fn linear_study_converges_past_band_limit() {
        let mut m = MaterialModel::regular_default();
        m.potential = Potential::Zero;
        m.bulk = BulkModulus::Constant(0.0);
        m.c0 = 1e-2;
        // band limit: modes (0,0), (1,0), (0,1), (1,1), (2,0)
        let phi0 = |x: &[f64]| 0.3 + (PI * x[0]).cos() * (PI * x[1]).cos() + 0.5 * (2.0 * PI * x[0]).cos();
        let table = convergence_study(&[2, 6, 10, 14], 2, &[1.0, 1.0], phi0, |_| 0.0, &m, 0.1, 1e-12).unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows[0].difference > 1e-2);
        assert!(table.rows[1].difference < 1e-8);
        assert!(table.rows[2].difference < 1e-8);
        let single = convergence_study(&[3], 2, &[1.0, 1.0], phi0, |_| 0.0, &m, 0.1, 1e-8).unwrap();
        assert!(single.rows.is_empty() && single.monotone);
        assert!(convergence_study(&[4, 4], 2, &[1.0, 1.0], phi0, |_| 0.0, &m, 0.1, 1e-8).is_err());
    }
}
