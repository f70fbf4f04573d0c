use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::energy;
use crate::error::{Error, Result};
use crate::fields::solver::CgOptions;
use crate::fields::{divergence, ScalarField, Spectral, VectorField};
use crate::material::{limit_entropy, Entropy, FloryHugginsConvex, MaterialModel, Potential, Profile, Regime};

use super::config::SimConfig;
use super::phase::PhaseSolver;
use super::state::{chemical_potential, State};
use super::velocity::{capillary_force, CapillaryForm, VelocitySolver};

pub const CSV_HEADER: &str = "t,E_mix,E_bulk,E_kin,E_total,D_cross,D_q,D_eps,D_visc,mass,min_phi,max_phi,div_u_norm";

/// Diagnostics after one step. Dissipation terms belong to the step that
/// produced the state (zero-step values are instantaneous).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub e_mix: f64,
    pub e_bulk: f64,
    pub e_kin: f64,
    pub e_total: f64,
    pub d_cross: f64,
    pub d_q: f64,
    pub d_eps: f64,
    pub d_visc: f64,
    pub mass: f64,
    pub min_phi: f64,
    pub max_phi: f64,
    pub div_u_norm: f64,
    pub iterations: usize,
    /// `integral G(phi)` in the degenerate regime.
    pub entropy: Option<f64>,
}

impl StepRecord {
    pub fn dissipation(&self) -> f64 {
        self.d_cross + self.d_q + self.d_eps + self.d_visc
    }

    pub fn csv_row(&self) -> String {
        let v = [
            self.t,
            self.e_mix,
            self.e_bulk,
            self.e_kin,
            self.e_total,
            self.d_cross,
            self.d_q,
            self.d_eps,
            self.d_visc,
            self.mass,
            self.min_phi,
            self.max_phi,
            self.div_u_norm,
        ];
        v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub dt: f64,
    /// States at output times, strictly increasing in `t`.
    pub states: Vec<State>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Stability heuristic for the explicit parts: relaxation and advective CFL.
/// Diffusive limits are absent because those terms are implicit.
pub fn dt_max(state: &State, material: &MaterialModel) -> f64 {
    let tau_min = state
        .phi
        .data()
        .iter()
        .map(|&s| material.tau(s))
        .fold(f64::INFINITY, f64::min);
    let umax = state.u.magnitude().max_abs();
    let h = state.grid().h_min();
    let cfl = if umax > 0.0 { h / umax } else { f64::INFINITY };
    (0.5 * tau_min).min(cfl)
}

/// Automatic step: a quarter of [`dt_max`], further limited by the fastest
/// spinodal growth rate `m_max c4^2 / (4 c0)`.
pub fn auto_dt(state: &State, material: &MaterialModel) -> f64 {
    let m_max = state
        .phi
        .data()
        .iter()
        .map(|&s| material.m(s))
        .fold(0.0, f64::max)
        .max(1e-12);
    let c4 = material.concavity_bound().max(1.0);
    (0.25 * dt_max(state, material)).min(0.04 * material.c0 / (m_max * c4 * c4))
}

fn check_degenerate_data(phi: &ScalarField, material: &MaterialModel) -> Result<()> {
    let (lo, hi) = (phi.min(), phi.max());
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::Precondition(format!(
            "degenerate regime needs phi0 in [0, 1], got [{lo}, {hi}]"
        )));
    }
    let base = material.mobility.base();
    let theta = material.potential.theta_c().unwrap_or(0.0);
    let mut total = 0.0;
    for &s in phi.data() {
        let f1 = if s > 0.0 && s < 1.0 {
            FloryHugginsConvex.derivatives(s)?.value
        } else {
            0.0
        };
        let f = match material.potential {
            Potential::FloryHuggins { .. } | Potential::RegularizedFloryHuggins { .. } => f1 + theta * s * (1.0 - s),
            _ => material.potential.value(s)?,
        };
        total += f + limit_entropy(base, s);
    }
    if !total.is_finite() {
        return Err(Error::Precondition(
            "initial free energy plus entropy is not finite".into(),
        ));
    }
    Ok(())
}

pub struct Simulation {
    config: SimConfig,
    dt: f64,
    steps: usize,
    step: usize,
    phase: PhaseSolver,
    velocity: VelocitySolver,
    state: State,
    entropy: Option<Entropy>,
}

impl Simulation {
    pub fn new(config: &SimConfig, phi0: ScalarField, q0: ScalarField, u0: VectorField) -> Result<Simulation> {
        config.validate()?;
        let grid = config.grid;
        grid.check_same(phi0.grid())?;
        let material = &config.material;
        let entropy = match config.regime {
            Regime::Degenerate => {
                check_degenerate_data(&phi0, material)?;
                Some(material.entropy()?)
            }
            Regime::Regular => None,
        };
        let state = State::new(0.0, phi0, q0, u0, material)?;
        let dt = config.dt.unwrap_or_else(|| auto_dt(&state, material));
        let steps = ((config.t_end / dt).round() as usize).max(1);
        let spectral = Arc::new(Spectral::new(&grid));
        let opts = CgOptions {
            rel_tol: config.solver.tol,
            abs_tol: 1e-300,
            max_iter: config.solver.max_iter,
        };
        Ok(Simulation {
            phase: PhaseSolver::new(spectral.clone(), opts),
            velocity: VelocitySolver::new(spectral, opts, config.solver.projection_tol),
            config: config.clone(),
            dt,
            steps,
            step: 0,
            state,
            entropy,
        })
    }

    /// Builds the initial data named in the config.
    pub fn from_config(config: &SimConfig) -> Result<Simulation> {
        let g = config.grid;
        let phi = config.init_phi.build(&g, config.seed)?;
        let q = config.init_q.build(&g, config.seed.wrapping_add(1))?;
        let u = config.init_u.build(&g)?;
        Simulation::new(config, phi, q, u)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.steps
    }

    fn record(&self, d: [f64; 4], iterations: usize) -> Result<StepRecord> {
        let s = &self.state;
        let e = energy(s, &self.config.material)?;
        let entropy = self
            .entropy
            .as_ref()
            .map(|g| s.phi.data().iter().map(|&x| g.value(x)).sum::<f64>() * s.grid().cell_volume());
        Ok(StepRecord {
            step: self.step,
            t: s.t,
            e_mix: e.e_mix,
            e_bulk: e.e_bulk,
            e_kin: e.e_kin,
            e_total: e.e_total,
            d_cross: d[0],
            d_q: d[1],
            d_eps: d[2],
            d_visc: d[3],
            mass: s.phi.integrate(),
            min_phi: s.phi.min(),
            max_phi: s.phi.max(),
            div_u_norm: divergence(&s.u).norm_l2(),
            iterations,
            entropy,
        })
    }

    /// Record of the current state with instantaneous dissipation.
    pub fn initial_record(&self) -> Result<StepRecord> {
        let e = energy(&self.state, &self.config.material)?;
        self.record([e.d_cross, e.d_q, e.d_eps, e.d_visc], 0)
    }

    pub fn advance(&mut self) -> Result<StepRecord> {
        let dt = self.dt;
        let material = &self.config.material;
        let t_new = self.state.t + dt;
        let coupled = self.config.capillary == CapillaryForm::PhiGradMu;
        let ph = self.phase.step(&self.state, material, dt, coupled)?;
        let start = match &ph.u_tilde {
            Some(u) => u.clone(),
            None => {
                let new_mu = chemical_potential(&ph.phi, material, None).map_err(|e| e.at(t_new))?;
                let f = capillary_force(&ph.phi, &new_mu, self.config.capillary, material);
                &self.state.u + &f.scale(dt)
            }
        };
        let vs = self
            .velocity
            .step(&self.state.u, &start, &ph.phi, material, dt, t_new)?;
        self.state.t = t_new;
        self.state.phi = ph.phi;
        self.state.q = ph.q;
        self.state.u = vs.u;
        self.state.p = vs.p;
        self.state.refresh_mu(material).map_err(|e| e.at(t_new))?;
        self.step += 1;
        self.record([ph.d_cross, ph.d_q, ph.d_eps, vs.d_visc], ph.iterations + vs.iterations)
    }

    /// Runs to the end, calling `on_output` with every stored state.
    pub fn run_with(mut self, mut on_output: impl FnMut(&State, &StepRecord) -> Result<()>) -> Result<Trajectory> {
        let first = self.initial_record()?;
        on_output(&self.state, &first)?;
        let mut states = vec![self.state.clone()];
        let mut records = vec![first];
        let every = self.config.output_every;
        while !self.is_done() {
            let r = self.advance()?;
            let store = self.is_done() || (every > 0 && self.step.is_multiple_of(every));
            if store {
                on_output(&self.state, &r)?;
                states.push(self.state.clone());
            }
            records.push(r);
        }
        Ok(Trajectory {
            dt: self.dt,
            states,
            records,
        })
    }

    pub fn run(self) -> Result<Trajectory> {
        self.run_with(|_, _| Ok(()))
    }
}

/// Runs `config` from the given initial data.
pub fn simulate(config: &SimConfig, phi0: ScalarField, q0: ScalarField, u0: VectorField) -> Result<Trajectory> {
    Simulation::new(config, phi0, q0, u0)?.run()
}
