use rayon::prelude::*;

use crate::diagnostics::{
    bounds_report, check_energy_inequality, gronwall_fit, relative_energy, BoundsReport, EnergyInequalityReport,
    GronwallFit, RelativeEnergyReport,
};
use crate::dynamics::{unstable_mode_perturbation, SimConfig, Simulation, StepRecord};
use crate::error::{Error, Result};
use crate::fields::{Boundary, Grid};
use crate::galerkin::{coefficient_distance, integrate_galerkin, CauchyRow, CosineBasis, GalerkinRun, GalerkinState};
use crate::material::{regularize_mobility, MaterialModel, Potential, Regime};

/// Relative energy of one perturbed run against the unperturbed reference.
#[derive(Clone, Debug)]
pub struct WeakStrongSeries {
    pub epsilon: f64,
    pub t: Vec<f64>,
    pub relative: Vec<RelativeEnergyReport>,
    pub fit: GronwallFit,
    /// Smallest separation margin over both runs.
    pub kappa: f64,
    /// Growth rate of the perturbed mode predicted by linearization.
    pub predicted_rate: f64,
}

impl WeakStrongSeries {
    pub fn final_e_rel(&self) -> f64 {
        self.relative.last().map_or(0.0, |r| r.e_total)
    }

    pub fn max_e_rel(&self) -> f64 {
        self.relative.iter().map(|r| r.e_total).fold(0.0, f64::max)
    }
}

fn margin(r: &StepRecord) -> f64 {
    r.min_phi.min(1.0 - r.max_phi)
}

/// Runs the reference from the configured data and, in lockstep, a copy whose
/// phase and stress are shifted by `epsilon` times the growing linear mode.
pub fn weak_strong_run(sim: &SimConfig, epsilon: f64) -> Result<WeakStrongSeries> {
    let g = sim.grid;
    let phi0 = sim.init_phi.build(&g, sim.seed)?;
    let q0 = sim.init_q.build(&g, sim.seed.wrapping_add(1))?;
    let u0 = sim.init_u.build(&g)?;
    let pert = unstable_mode_perturbation(&g, &sim.material, phi0.mean())?;
    let mut reference = Simulation::new(sim, phi0.clone(), q0.clone(), u0.clone())?;
    let mut perturbed = Simulation::new(sim, &phi0 + &(&pert.phi * epsilon), &q0 + &(&pert.q * epsilon), u0)?;
    let mut t = Vec::new();
    let mut relative = Vec::new();
    let mut kappa = margin(&reference.initial_record()?).min(margin(&perturbed.initial_record()?));
    loop {
        t.push(reference.state().t);
        relative.push(relative_energy(perturbed.state(), reference.state(), &sim.material)?);
        if reference.is_done() {
            break;
        }
        let (a, b) = rayon::join(|| reference.advance(), || perturbed.advance());
        kappa = kappa.min(margin(&a?)).min(margin(&b?));
    }
    let e: Vec<f64> = relative.iter().map(|r| r.e_total).collect();
    let d: Vec<f64> = relative.iter().map(|r| r.dissipation).collect();
    let fit = gronwall_fit(&t, &e, &d, 1e-10)?;
    Ok(WeakStrongSeries {
        epsilon,
        t,
        relative,
        fit,
        kappa,
        predicted_rate: pert.rate,
    })
}

pub fn weak_strong(sim: &SimConfig, epsilons: &[f64]) -> Result<Vec<WeakStrongSeries>> {
    epsilons.par_iter().map(|&e| weak_strong_run(sim, e)).collect()
}

/// Same constitutive laws with every regularization moved to `delta`.
pub fn material_at_delta(m: &MaterialModel, delta: f64) -> Result<MaterialModel> {
    let mut out = m.clone();
    if m.mobility.is_degenerate() || m.mobility.delta().is_some() {
        out.mobility = regularize_mobility(m.mobility.base(), delta)?;
    }
    out.potential = match m.potential {
        Potential::FloryHuggins { theta_c } | Potential::RegularizedFloryHuggins { theta_c, .. } => {
            Potential::regularized_flory_huggins(theta_c, delta)?
        }
        p => p,
    };
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SweepMember {
    pub delta: f64,
    pub bounds: BoundsReport,
    pub energy: EnergyInequalityReport,
    pub records: Vec<StepRecord>,
    pub dt: f64,
}

/// One degenerate-regime run per `delta`, largest `delta` first.
pub fn degenerate_sweep(sim: &SimConfig, deltas: &[f64], tol0: f64) -> Result<Vec<SweepMember>> {
    if sim.regime != Regime::Degenerate {
        return Err(Error::Precondition(
            "the degenerate sweep needs regime = degenerate".into(),
        ));
    }
    let mut deltas = deltas.to_vec();
    deltas.sort_by(|a, b| b.total_cmp(a));
    deltas
        .par_iter()
        .map(|&delta| {
            let mut cfg = sim.clone();
            cfg.material = material_at_delta(&sim.material, delta)?;
            let traj = Simulation::from_config(&cfg)?.run()?;
            Ok(SweepMember {
                delta,
                bounds: bounds_report(&traj, &cfg.material, tol0)?,
                energy: check_energy_inequality(&traj),
                dt: traj.dt,
                records: traj.records,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct GalerkinMember {
    pub m: usize,
    pub basis: CosineBasis,
    pub run: GalerkinRun,
}

/// Projects the configured initial data onto each mode count and integrates
/// the flow-free phase-stress system on the grid's box.
pub fn galerkin_study(
    sim: &SimConfig,
    modes: &[usize],
    t_end: f64,
    rtol: f64,
    outputs: usize,
) -> Result<(Vec<GalerkinMember>, Vec<CauchyRow>)> {
    if modes.is_empty() || modes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition(
            "galerkin.modes must be a non-empty increasing list".into(),
        ));
    }
    let dim = sim.grid.dim();
    let len = sim.grid.len();
    let bases = modes
        .iter()
        .map(|&m| CosineBasis::new(dim, &len[..dim], m))
        .collect::<Result<Vec<_>>>()?;
    let kmax = bases
        .iter()
        .flat_map(|b| b.modes().iter().flat_map(|k| k.iter()))
        .max()
        .copied()
        .unwrap_or(0);
    let n = (4 * (kmax + 1)).max(64);
    let fine = Grid::new(dim, &vec![n; dim], &len[..dim], Boundary::Neumann)?;
    let phi = sim.init_phi.build(&fine, sim.seed)?;
    let q = sim.init_q.build(&fine, sim.seed.wrapping_add(1))?;
    let members = modes
        .par_iter()
        .zip(bases)
        .map(|(&m, basis)| {
            let init = GalerkinState::new(
                &basis,
                &sim.material,
                basis.project_field(&phi)?,
                basis.project_field(&q)?,
            )?;
            let run = integrate_galerkin(&init, &basis, &sim.material, t_end, rtol, outputs)?;
            Ok(GalerkinMember { m, basis, run })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = members
        .windows(2)
        .map(|w| CauchyRow {
            m_coarse: w[0].m,
            m_fine: w[1].m,
            difference: coefficient_distance(
                &w[0].basis,
                &w[0].run.final_state().phi,
                &w[1].basis,
                &w[1].run.final_state().phi,
            ),
        })
        .collect();
    Ok((members, rows))
}
