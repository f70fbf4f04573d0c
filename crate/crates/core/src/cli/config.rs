use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::dynamics::{CapillaryForm, ScalarInit, SimConfig, VelocityInit};
use crate::error::{Error, Result};
use crate::fields::{Boundary, Grid};
use crate::material::{
    regularize_mobility, BulkModulus, MaterialModel, Mobility, MobilityKind, Potential, PotentialKind, Regime,
    ScalarLaw,
};

/// Settings of the experiment subcommands; unused by plain runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSettings {
    pub ws_epsilons: Vec<f64>,
    pub ws_residual_tol: f64,
    pub ws_kappa_min: f64,
    pub galerkin_modes: Vec<usize>,
    pub galerkin_t_end: f64,
    pub galerkin_rtol: f64,
    pub galerkin_outputs: usize,
    pub sweep_deltas: Vec<f64>,
    pub sweep_tol0: f64,
    pub sweep_overshoot_tol: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            ws_epsilons: vec![1e-3, 5e-4],
            ws_residual_tol: 0.05,
            ws_kappa_min: 1e-2,
            galerkin_modes: vec![8, 16, 32],
            galerkin_t_end: 0.5,
            galerkin_rtol: 1e-9,
            galerkin_outputs: 50,
            sweep_deltas: vec![1e-2, 1e-3, 1e-4],
            sweep_tol0: 1e-2,
            sweep_overshoot_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub experiment: ExperimentSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sim: SimConfig::regular_default(),
            experiment: ExperimentSettings::default(),
        }
    }
}

/// Every key a configuration file may set.
pub const KEYS: &[&str] = &[
    "regime",
    "grid.dim",
    "grid.n",
    "grid.len",
    "grid.bc",
    "potential.kind",
    "potential.theta_c",
    "mobility.kind",
    "mobility.value",
    "regularization.delta",
    "viscosity.eta",
    "relaxation.tau",
    "bulk.kind",
    "bulk.value",
    "bulk.alpha",
    "bulk.power",
    "c0",
    "eps1",
    "stabilization.a",
    "stabilization.enforce",
    "time.dt",
    "time.t_end",
    "time.output_every",
    "capillary.form",
    "seed",
    "init.phi",
    "init.q",
    "init.u",
    "solver.tol",
    "solver.max_iter",
    "solver.projection_tol",
    "weakstrong.epsilons",
    "weakstrong.residual_tol",
    "weakstrong.kappa_min",
    "galerkin.modes",
    "galerkin.t_end",
    "galerkin.rtol",
    "galerkin.outputs",
    "sweep.deltas",
    "sweep.tol0",
    "sweep.overshoot_tol",
];

const MANIFEST_KEYS: &[&str] = &["manifest.fingerprint", "manifest.output_dir", "manifest.version"];

/// Key-value pairs with the line each came from.
struct Entries(BTreeMap<String, (usize, String)>);

impl Entries {
    fn parse(text: &str, extra: &[&str]) -> Result<Entries> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) && !extra.contains(&k) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key '{k}'"),
                });
            }
            if v.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("key '{k}' has no value"),
                });
            }
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(Error::Config {
                    line,
                    message: format!("key '{k}' repeats line {first}"),
                });
            }
        }
        Ok(Entries(map))
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.0)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|e| e.1.as_str())
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(key),
            message: format!("{key}: {}", message.into()),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.err(key, format!("cannot parse '{v}'"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| self.err(key, format!("cannot parse '{s}'")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Attributes an error raised while building an object to the key behind it.
    fn wrap<T>(&self, key: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            e @ (Error::Config { .. } | Error::Constraint { .. }) => e,
            e => self.err(key, e.to_string()),
        })
    }
}

/// Fully defaulted simulation config; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_run_config(text).map(|r| r.sim)
}

pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let e = Entries::parse(text, &[])?;
    build(&e)
}

fn build(e: &Entries) -> Result<RunConfig> {
    let regime = match e.raw("regime") {
        None => Regime::Regular,
        Some(v) => {
            Regime::parse(v).ok_or_else(|| e.err("regime", format!("'{v}' is neither regular nor degenerate")))?
        }
    };
    let delta: Option<f64> = e.get("regularization.delta")?;
    if let Some(d) = delta {
        if !(d > 0.0 && d < 0.5) {
            return Err(e.err("regularization.delta", format!("delta = {d} must lie in (0, 1/2)")));
        }
    }
    let mut sim = match regime {
        Regime::Regular => SimConfig::regular_default(),
        Regime::Degenerate => e.wrap(
            "regularization.delta",
            SimConfig::degenerate_default(delta.unwrap_or(1e-3)),
        )?,
    };

    // grid
    let dim: usize = e.or("grid.dim", sim.grid.dim())?;
    if !(1..=3).contains(&dim) {
        return Err(e.err("grid.dim", format!("dimension {dim} is not 1, 2 or 3")));
    }
    let n = match e.list::<usize>("grid.n")? {
        None => vec![sim.grid.n()[0]; dim],
        Some(v) if v.len() == 1 => vec![v[0]; dim],
        Some(v) if v.len() == dim => v,
        Some(v) => return Err(e.err("grid.n", format!("{} sizes for dimension {dim}", v.len()))),
    };
    let len = match e.list::<f64>("grid.len")? {
        None => vec![sim.grid.len()[0]; dim],
        Some(v) if v.len() == 1 => vec![v[0]; dim],
        Some(v) if v.len() == dim => v,
        Some(v) => return Err(e.err("grid.len", format!("{} lengths for dimension {dim}", v.len()))),
    };
    let bc = match e.raw("grid.bc") {
        None => sim.grid.bc(),
        Some(v) => Boundary::parse(v).ok_or_else(|| e.err("grid.bc", format!("unknown boundary '{v}'")))?,
    };
    sim.grid = e.wrap("grid.n", Grid::new(dim, &n, &len, bc))?;

    // material
    let m = &mut sim.material;
    let theta_c: f64 = e.or("potential.theta_c", m.potential.theta_c().unwrap_or(2.5))?;
    let pdelta = delta.or(m.potential.delta()).unwrap_or(1e-3);
    let pkind = match e.raw("potential.kind") {
        None => m.potential.kind(),
        Some(v) => {
            PotentialKind::parse(v).ok_or_else(|| e.err("potential.kind", format!("unknown potential '{v}'")))?
        }
    };
    m.potential = match pkind {
        PotentialKind::DoubleWell => Potential::DoubleWell,
        PotentialKind::Zero => Potential::Zero,
        PotentialKind::FloryHuggins => Potential::FloryHuggins { theta_c },
        PotentialKind::RegularizedFloryHuggins => {
            e.wrap("potential.kind", Potential::regularized_flory_huggins(theta_c, pdelta))?
        }
    };
    let mkind = match e.raw("mobility.kind") {
        None => m.mobility.kind(),
        Some(v) => MobilityKind::parse(v).ok_or_else(|| e.err("mobility.kind", format!("unknown mobility '{v}'")))?,
    };
    let mdelta = delta.or(m.mobility.delta());
    m.mobility = match mkind {
        MobilityKind::Constant => {
            let current = match &m.mobility {
                Mobility::Root(law) => law.as_constant(),
                _ => None,
            };
            Mobility::constant(e.or("mobility.value", current.unwrap_or(1.0))?)
        }
        MobilityKind::Degenerate | MobilityKind::DegenerateSquared => {
            let base = if mkind == MobilityKind::Degenerate {
                Mobility::Degenerate
            } else {
                Mobility::DegenerateSquared
            };
            match mdelta {
                Some(d) => e.wrap("regularization.delta", regularize_mobility(&base, d))?,
                None => base,
            }
        }
    };
    if let Some(v) = e.get::<f64>("viscosity.eta")? {
        m.viscosity = ScalarLaw::Constant(v);
    }
    if let Some(v) = e.get::<f64>("relaxation.tau")? {
        m.relaxation = ScalarLaw::Constant(v);
    }
    let bulk_kind = e.raw("bulk.kind").unwrap_or(match m.bulk {
        BulkModulus::Constant(_) => "constant",
        BulkModulus::MobilityPower { .. } => "mobility-power",
    });
    m.bulk = match bulk_kind {
        "constant" => {
            let cur = if let BulkModulus::Constant(a) = m.bulk { a } else { 1.0 };
            BulkModulus::Constant(e.or("bulk.value", cur)?)
        }
        "mobility-power" => {
            let (a0, p0) = match m.bulk {
                BulkModulus::MobilityPower { alpha, power } => (alpha, power),
                _ => (1.0, 3.0),
            };
            BulkModulus::MobilityPower {
                alpha: e.or("bulk.alpha", a0)?,
                power: e.or("bulk.power", p0)?,
            }
        }
        other => return Err(e.err("bulk.kind", format!("unknown bulk modulus '{other}'"))),
    };
    m.c0 = e.or("c0", m.c0)?;
    m.eps1 = e.or("eps1", m.eps1)?;
    m.stabilization = e.or("stabilization.a", m.potential.concavity_bound() / 2.0 + 1.0)?;
    sim.enforce_stabilization = e.or("stabilization.enforce", true)?;

    // time stepping and data
    sim.dt = match e.raw("time.dt") {
        None | Some("auto") => None,
        Some(_) => e.get("time.dt")?,
    };
    sim.t_end = e.or("time.t_end", sim.t_end)?;
    sim.output_every = e.or("time.output_every", sim.output_every)?;
    if let Some(v) = e.raw("capillary.form") {
        sim.capillary =
            CapillaryForm::parse(v).ok_or_else(|| e.err("capillary.form", format!("unknown form '{v}'")))?;
    }
    sim.seed = e.or("seed", sim.seed)?;
    if let Some(v) = e.raw("init.phi") {
        sim.init_phi = e.wrap("init.phi", ScalarInit::parse(v, "phi"))?;
    }
    if let Some(v) = e.raw("init.q") {
        sim.init_q = e.wrap("init.q", ScalarInit::parse(v, "q"))?;
    }
    if let Some(v) = e.raw("init.u") {
        sim.init_u = e.wrap("init.u", VelocityInit::parse(v))?;
    }
    sim.solver.tol = e.or("solver.tol", sim.solver.tol)?;
    sim.solver.max_iter = e.or("solver.max_iter", sim.solver.max_iter)?;
    sim.solver.projection_tol = e.or("solver.projection_tol", sim.solver.projection_tol)?;
    sim.regime = regime;

    let d = ExperimentSettings::default();
    let experiment = ExperimentSettings {
        ws_epsilons: e.list("weakstrong.epsilons")?.unwrap_or(d.ws_epsilons),
        ws_residual_tol: e.or("weakstrong.residual_tol", d.ws_residual_tol)?,
        ws_kappa_min: e.or("weakstrong.kappa_min", d.ws_kappa_min)?,
        galerkin_modes: e.list("galerkin.modes")?.unwrap_or(d.galerkin_modes),
        galerkin_t_end: e.or("galerkin.t_end", d.galerkin_t_end)?,
        galerkin_rtol: e.or("galerkin.rtol", d.galerkin_rtol)?,
        galerkin_outputs: e.or("galerkin.outputs", d.galerkin_outputs)?,
        sweep_deltas: e.list("sweep.deltas")?.unwrap_or(d.sweep_deltas),
        sweep_tol0: e.or("sweep.tol0", d.sweep_tol0)?,
        sweep_overshoot_tol: e.or("sweep.overshoot_tol", d.sweep_overshoot_tol)?,
    };
    if let Some(bad) = experiment.sweep_deltas.iter().find(|d| !(**d > 0.0 && **d < 0.5)) {
        return Err(e.err("sweep.deltas", format!("delta = {bad} must lie in (0, 1/2)")));
    }
    if regime == Regime::Degenerate && !sim.material.mobility.is_degenerate() && sim.material.mobility.delta().is_none()
    {
        return Err(e.err("mobility.kind", "the degenerate regime needs a degenerate mobility"));
    }
    sim.validate()?;
    Ok(RunConfig { sim, experiment })
}

fn join<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Every key with its resolved value; `parse_run_config(emit_config(c)) == c`
/// for configs built from keys.
pub fn emit_config(c: &RunConfig) -> String {
    let s = &c.sim;
    let m = &s.material;
    let g = &s.grid;
    let dim = g.dim();
    let mut o = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(o, "{k} = {v}");
    };
    kv("regime", s.regime.name().into());
    kv("grid.dim", dim.to_string());
    kv("grid.n", join(&g.n()[..dim]));
    kv("grid.len", join(&g.len()[..dim]));
    kv("grid.bc", g.bc().name().into());
    kv("potential.kind", m.potential.kind().name().into());
    if let Some(t) = m.potential.theta_c() {
        kv("potential.theta_c", format!("{t:?}"));
    }
    kv("mobility.kind", m.mobility.kind().name().into());
    if let Mobility::Root(law) = &m.mobility {
        if let Some(v) = law.as_constant() {
            kv("mobility.value", format!("{v:?}"));
        }
    }
    if let Some(d) = m.mobility.delta().or(m.potential.delta()) {
        kv("regularization.delta", format!("{d:?}"));
    }
    if let Some(v) = m.viscosity.as_constant() {
        kv("viscosity.eta", format!("{v:?}"));
    }
    if let Some(v) = m.relaxation.as_constant() {
        kv("relaxation.tau", format!("{v:?}"));
    }
    match m.bulk {
        BulkModulus::Constant(a) => {
            kv("bulk.kind", "constant".into());
            kv("bulk.value", format!("{a:?}"));
        }
        BulkModulus::MobilityPower { alpha, power } => {
            kv("bulk.kind", "mobility-power".into());
            kv("bulk.alpha", format!("{alpha:?}"));
            kv("bulk.power", format!("{power:?}"));
        }
    }
    kv("c0", format!("{:?}", m.c0));
    kv("eps1", format!("{:?}", m.eps1));
    kv("stabilization.a", format!("{:?}", m.stabilization));
    kv("stabilization.enforce", s.enforce_stabilization.to_string());
    kv("time.dt", s.dt.map_or("auto".into(), |d| format!("{d:?}")));
    kv("time.t_end", format!("{:?}", s.t_end));
    kv("time.output_every", s.output_every.to_string());
    kv("capillary.form", s.capillary.name().into());
    kv("seed", s.seed.to_string());
    kv("init.phi", s.init_phi.to_string());
    kv("init.q", s.init_q.to_string());
    kv("init.u", s.init_u.to_string());
    kv("solver.tol", format!("{:?}", s.solver.tol));
    kv("solver.max_iter", s.solver.max_iter.to_string());
    kv("solver.projection_tol", format!("{:?}", s.solver.projection_tol));
    let x = &c.experiment;
    kv("weakstrong.epsilons", join(&x.ws_epsilons));
    kv("weakstrong.residual_tol", format!("{:?}", x.ws_residual_tol));
    kv("weakstrong.kappa_min", format!("{:?}", x.ws_kappa_min));
    kv("galerkin.modes", join(&x.galerkin_modes));
    kv("galerkin.t_end", format!("{:?}", x.galerkin_t_end));
    kv("galerkin.rtol", format!("{:?}", x.galerkin_rtol));
    kv("galerkin.outputs", x.galerkin_outputs.to_string());
    kv("sweep.deltas", join(&x.sweep_deltas));
    kv("sweep.tol0", format!("{:?}", x.sweep_tol0));
    kv("sweep.overshoot_tol", format!("{:?}", x.sweep_overshoot_tol));
    o
}

/// Applies `key=value` overrides on top of config text; later pairs win.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    let mut keep: Vec<String> = Vec::new();
    let keys: Vec<(String, String)> = overrides
        .iter()
        .map(|o| {
            o.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config {
                    line: 0,
                    message: format!("override '{o}' is not key=value"),
                })
        })
        .collect::<Result<_>>()?;
    for line in text.lines() {
        let key = line
            .split('#')
            .next()
            .unwrap_or("")
            .split('=')
            .next()
            .unwrap_or("")
            .trim();
        if keys.iter().any(|(k, _)| k == key) {
            // keep line numbering stable
            keep.push(String::new());
        } else {
            keep.push(line.to_string());
        }
    }
    let mut last: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in &keys {
        last.insert(k, v);
    }
    for (k, v) in last {
        keep.push(format!("{k} = {v}"));
    }
    Ok(keep.join("\n"))
}

/// Hash of every material constant.
pub fn material_fingerprint(m: &MaterialModel) -> String {
    let digest = Sha256::digest(m.describe().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub config: RunConfig,
    pub fingerprint: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub version: String,
}

impl RunManifest {
    pub fn new(config: RunConfig, output_dir: PathBuf) -> RunManifest {
        RunManifest {
            fingerprint: material_fingerprint(&config.sim.material),
            seed: config.sim.seed,
            config,
            output_dir,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn emit(&self) -> String {
        let mut o = emit_config(&self.config);
        let _ = writeln!(o, "manifest.fingerprint = {}", self.fingerprint);
        let _ = writeln!(o, "manifest.output_dir = {}", self.output_dir.display());
        let _ = writeln!(o, "manifest.version = {}", self.version);
        o
    }

    /// Rejects manifests whose fingerprint does not match their constants.
    pub fn parse(text: &str) -> Result<RunManifest> {
        let e = Entries::parse(text, MANIFEST_KEYS)?;
        let config = build(&e)?;
        let field = |k: &str| {
            e.raw(k).map(str::to_string).ok_or_else(|| Error::Config {
                line: 0,
                message: format!("manifest lacks '{k}'"),
            })
        };
        let fingerprint = field("manifest.fingerprint")?;
        if fingerprint != material_fingerprint(&config.sim.material) {
            return Err(e.err("manifest.fingerprint", "does not match the material constants"));
        }
        Ok(RunManifest {
            seed: config.sim.seed,
            config,
            fingerprint,
            output_dir: PathBuf::from(field("manifest.output_dir")?),
            version: field("manifest.version")?,
        })
    }
}
