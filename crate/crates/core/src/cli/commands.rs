use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::diagnostics::{check_records, Check, GronwallFit, Report, STEP_TOL};
use crate::dynamics::{Simulation, State, StepRecord, CSV_HEADER};
use crate::error::{Error, Result};
use crate::fields::write_snapshot;
use crate::material::Regime;

use super::config::{RunConfig, RunManifest};
use super::experiments::{degenerate_sweep, galerkin_study, weak_strong};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CHECK: i32 = 4;

/// Largest allowed drift of `integral phi`.
pub const MASS_TOL: f64 = 1e-10;

/// Exit code for an error: numerical failures are 3, everything else 2.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

#[derive(Clone, Debug, Default)]
pub struct CommandOutcome {
    pub report: Report,
    /// Informational lines that do not affect the exit code.
    pub notes: Vec<String>,
}

impl CommandOutcome {
    pub fn code(&self) -> i32 {
        if self.report.passed() {
            EXIT_OK
        } else {
            EXIT_CHECK
        }
    }

    pub fn render(&self) -> String {
        let mut s = self.report.to_string();
        for n in &self.notes {
            s.push_str("note  ");
            s.push_str(n);
            s.push('\n');
        }
        s
    }

    fn write(&self, out: &Path) -> Result<()> {
        fs::write(out.join("report.txt"), self.render())?;
        fs::write(out.join("report.jsonl"), self.report.to_jsonl())?;
        Ok(())
    }
}

fn write_manifest(config: &RunConfig, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let manifest = RunManifest::new(config.clone(), out.to_path_buf());
    fs::write(out.join("manifest.txt"), manifest.emit())?;
    Ok(())
}

fn write_state(dir: &Path, step: usize, s: &State) -> Result<()> {
    let g = *s.grid();
    let names = ["u_x", "u_y", "u_z"];
    let mut fields: Vec<(&str, &[f64])> = vec![
        ("phi", s.phi.data()),
        ("q", s.q.data()),
        ("mu", s.mu.data()),
        ("p", s.p.data()),
    ];
    for a in 0..g.dim() {
        fields.push((names[a], s.u.comp(a)));
    }
    write_snapshot(&dir.join(format!("step_{step:06}.vpf")), &g, &fields)
}

/// Mass drift, per-step energy monotonicity and incompressibility of a run.
pub fn run_report(records: &[StepRecord], dt: f64, projection_tol: f64) -> CommandOutcome {
    let mut out = CommandOutcome::default();
    let ie = check_records(records, dt, STEP_TOL);
    let m0 = records.first().map_or(0.0, |r| r.mass);
    let drift = records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    let div = records.iter().skip(1).map(|r| r.div_u_norm).fold(0.0, f64::max);
    out.report
        .push(Check::at_most("mass drift", drift, MASS_TOL))
        .push(Check {
            name: format!("energy increase beyond tolerance (worst step {})", ie.worst_step),
            value: ie.worst_excess,
            threshold: 0.0,
            pass: ie.passed,
        })
        .push(Check::at_most("max |div u|_2 after projection", div, projection_tol));
    out.notes.push(format!(
        "energy balance residual {:e} over {} steps (first-order constant {:e})",
        ie.balance_residual, ie.steps, ie.balance_constant
    ));
    if let (Some(a), Some(b)) = (records.first(), records.last()) {
        out.notes.push(format!("E_total {:e} -> {:e}", a.e_total, b.e_total));
    }
    out
}

/// Runs one simulation, streaming the diagnostics CSV and snapshots. Errors
/// leave the partial CSV behind.
pub fn cmd_run(config: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    write_manifest(config, out)?;
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps)?;
    let mut sim = Simulation::from_config(&config.sim)?;
    let mut csv = BufWriter::new(fs::File::create(out.join("diagnostics.csv"))?);
    writeln!(csv, "{CSV_HEADER}")?;
    let first = sim.initial_record()?;
    writeln!(csv, "{}", first.csv_row())?;
    write_state(&snaps, 0, sim.state())?;
    let mut records = vec![first];
    let every = config.sim.output_every;
    while !sim.is_done() {
        let r = match sim.advance() {
            Ok(r) => r,
            Err(e) => {
                csv.flush()?;
                return Err(e);
            }
        };
        writeln!(csv, "{}", r.csv_row())?;
        let step = sim.step_index();
        if sim.is_done() || (every > 0 && step.is_multiple_of(every)) {
            write_state(&snaps, step, sim.state())?;
        }
        records.push(r);
    }
    csv.flush()?;
    let mut outcome = run_report(&records, sim.dt(), config.sim.solver.projection_tol);
    if config.sim.regime == Regime::Degenerate {
        let lo = records.iter().map(|r| r.min_phi).fold(f64::INFINITY, f64::min);
        let hi = records.iter().map(|r| r.max_phi).fold(f64::NEG_INFINITY, f64::max);
        let entropy_ok = records.iter().all(|r| r.entropy.is_some_and(f64::is_finite));
        outcome
            .report
            .push(Check::flag("entropy finite at every step", entropy_ok));
        outcome.notes.push(format!(
            "phi range [{lo}, {hi}], overshoot {:e}",
            (-lo).max(hi - 1.0).max(0.0)
        ));
    }
    outcome
        .notes
        .push(format!("dt = {:e}, {} steps", sim.dt(), sim.steps()));
    outcome.write(out)?;
    Ok(outcome)
}

/// Twin runs against perturbed copies; Gronwall fits and quadratic scaling.
pub fn cmd_weakstrong(config: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    write_manifest(config, out)?;
    let x = &config.experiment;
    let series = weak_strong(&config.sim, &x.ws_epsilons)?;
    let mut outcome = CommandOutcome::default();
    for s in &series {
        let mut w = BufWriter::new(fs::File::create(
            out.join(format!("weakstrong_eps{:e}.csv", s.epsilon)),
        )?);
        writeln!(w, "t,E_rel,E_mix,E_bulk,E_kin,D")?;
        for (t, r) in s.t.iter().zip(&s.relative) {
            writeln!(
                w,
                "{t:e},{:e},{:e},{:e},{:e},{:e}",
                r.e_total, r.e_mix, r.e_bulk, r.e_kin, r.dissipation
            )?;
        }
        w.flush()?;
    }
    let gated = config.sim.regime == Regime::Degenerate && series.iter().any(|s| s.kappa < x.ws_kappa_min);
    if gated {
        let kappa = series.iter().map(|s| s.kappa).fold(f64::INFINITY, f64::min);
        outcome.notes.push(format!(
            "conditional hypothesis not met: separation margin {kappa:e} < kappa_min {:e}; Gronwall checks skipped",
            x.ws_kappa_min
        ));
    }
    for s in &series {
        match s.fit {
            GronwallFit::Coinciding { max_e_rel, atol, .. } => {
                outcome.report.push(Check::at_most(
                    format!("coinciding data: max E_rel (eps = {:e})", s.epsilon),
                    max_e_rel,
                    atol,
                ));
            }
            GronwallFit::Exponential { c, residual } => {
                if !gated {
                    outcome.report.push(Check::at_most(
                        format!("Gronwall residual (eps = {:e})", s.epsilon),
                        residual,
                        x.ws_residual_tol,
                    ));
                }
                outcome.notes.push(format!(
                    "eps = {:e}: C = {c:.4}, predicted linear 2*rate = {:.4}, E_rel(0) = {:e}, E_rel(end) = {:e}",
                    s.epsilon,
                    2.0 * s.predicted_rate,
                    s.relative[0].e_total,
                    s.final_e_rel()
                ));
            }
        }
    }
    let positive: Vec<_> = series.iter().filter(|s| s.epsilon > 0.0).collect();
    for w in positive.windows(2) {
        let scale = (w[0].epsilon / w[1].epsilon).powi(2);
        let ratio = w[0].final_e_rel() / w[1].final_e_rel();
        outcome.report.push(Check {
            name: format!(
                "E_rel(t_end) ratio eps {:e}/{:e} within 25% of {scale}",
                w[0].epsilon, w[1].epsilon
            ),
            value: ratio,
            threshold: scale,
            pass: (ratio - scale).abs() <= 0.25 * scale,
        });
    }
    outcome.write(out)?;
    Ok(outcome)
}

pub fn cmd_galerkin(config: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    write_manifest(config, out)?;
    let x = &config.experiment;
    let (members, rows) = galerkin_study(
        &config.sim,
        &x.galerkin_modes,
        x.galerkin_t_end,
        x.galerkin_rtol,
        x.galerkin_outputs,
    )?;
    let mut outcome = CommandOutcome::default();
    for m in &members {
        let mut w = BufWriter::new(fs::File::create(out.join(format!("galerkin_m{}.csv", m.m)))?);
        writeln!(w, "t,E_m,dissipation,dissipated,constant_mode")?;
        for r in &m.run.records {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e}",
                r.t, r.energy, r.dissipation, r.dissipated, r.constant_mode
            )?;
        }
        w.flush()?;
        outcome.report.push(Check::at_most(
            format!("E_m + int D <= E_m(0) (1 + tol), m = {}", m.m),
            m.run.energy_excess(),
            1e-6,
        ));
        let c0 = m.run.records[0].constant_mode;
        let drift = m
            .run
            .records
            .iter()
            .map(|r| (r.constant_mode - c0).abs())
            .fold(0.0, f64::max);
        outcome.notes.push(format!(
            "m = {}: constant-mode drift {drift:e}, {} accepted / {} rejected steps",
            m.m, m.run.accepted, m.run.rejected
        ));
    }
    let mut w = BufWriter::new(fs::File::create(out.join("cauchy.csv"))?);
    writeln!(w, "m_coarse,m_fine,difference")?;
    for r in &rows {
        writeln!(w, "{},{},{:e}", r.m_coarse, r.m_fine, r.difference)?;
    }
    w.flush()?;
    let monotone = rows.windows(2).all(|p| p[1].difference <= p[0].difference);
    if !rows.is_empty() {
        outcome.notes.push(format!(
            "Cauchy differences {}: {}",
            if monotone {
                "decrease monotonically"
            } else {
                "are not monotone"
            },
            rows.iter()
                .map(|r| format!("{:e}", r.difference))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    outcome.write(out)?;
    Ok(outcome)
}

pub fn cmd_degenerate_sweep(config: &RunConfig, out: &Path) -> Result<CommandOutcome> {
    write_manifest(config, out)?;
    let x = &config.experiment;
    let members = degenerate_sweep(&config.sim, &x.sweep_deltas, x.sweep_tol0)?;
    let mut outcome = CommandOutcome::default();
    let mut summary = BufWriter::new(fs::File::create(out.join("sweep.csv"))?);
    writeln!(
        summary,
        "delta,min_phi,max_phi,overshoot,kappa,near_degenerate_measure,entropy_max,energy_pass"
    )?;
    for m in &members {
        let b = &m.bounds;
        let emax = b.entropy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        writeln!(
            summary,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            m.delta, b.min_phi, b.max_phi, b.overshoot, b.kappa, b.near_degenerate_measure, emax, m.energy.passed
        )?;
        let mut w = BufWriter::new(fs::File::create(out.join(format!("sweep_delta{:e}.csv", m.delta)))?);
        writeln!(w, "{CSV_HEADER},entropy")?;
        for r in &m.records {
            writeln!(w, "{},{:e}", r.csv_row(), r.entropy.unwrap_or(f64::NAN))?;
        }
        w.flush()?;
        outcome
            .report
            .push(Check::flag(
                format!("entropy finite at every step, delta = {:e}", m.delta),
                b.entropy_finite(),
            ))
            .push(Check {
                name: format!("energy monotone, delta = {:e}", m.delta),
                value: m.energy.worst_excess,
                threshold: 0.0,
                pass: m.energy.passed,
            });
    }
    summary.flush()?;
    if let Some(last) = members.last() {
        outcome.report.push(Check::at_most(
            format!("overshoot at smallest delta = {:e}", last.delta),
            last.bounds.overshoot,
            x.sweep_overshoot_tol,
        ));
    }
    let monotone = members
        .windows(2)
        .all(|w| w[1].bounds.overshoot <= w[0].bounds.overshoot);
    outcome
        .report
        .push(Check::flag("overshoot non-increasing as delta decreases", monotone));
    outcome.write(out)?;
    Ok(outcome)
}

fn parse_records(csv: &str) -> Result<Vec<StepRecord>> {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or("");
    if header.trim() != CSV_HEADER {
        return Err(Error::Precondition("diagnostics.csv has an unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let v = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Precondition(format!("diagnostics.csv row {} is not numeric", i + 2)))?;
            if v.len() != 13 {
                return Err(Error::Precondition(format!(
                    "diagnostics.csv row {} has {} columns",
                    i + 2,
                    v.len()
                )));
            }
            Ok(StepRecord {
                step: i,
                t: v[0],
                e_mix: v[1],
                e_bulk: v[2],
                e_kin: v[3],
                e_total: v[4],
                d_cross: v[5],
                d_q: v[6],
                d_eps: v[7],
                d_visc: v[8],
                mass: v[9],
                min_phi: v[10],
                max_phi: v[11],
                div_u_norm: v[12],
                iterations: 0,
                entropy: None,
            })
        })
        .collect()
}

/// Re-derives the run checks from a run directory's manifest and CSV.
pub fn cmd_report(dir: &Path) -> Result<CommandOutcome> {
    let manifest = RunManifest::parse(&fs::read_to_string(dir.join("manifest.txt"))?)?;
    let records = parse_records(&fs::read_to_string(dir.join("diagnostics.csv"))?)?;
    let dt = match records.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => manifest.config.sim.dt.unwrap_or(0.0),
    };
    let mut outcome = run_report(&records, dt, manifest.config.sim.solver.projection_tol);
    outcome
        .notes
        .push(format!("material fingerprint {}", manifest.fingerprint));
    Ok(outcome)
}

/// Last snapshot written by `cmd_run` into `dir`.
pub fn final_snapshot(dir: &Path) -> Result<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir.join("snapshots"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "vpf"))
        .collect();
    files.sort();
    files
        .pop()
        .ok_or_else(|| Error::Precondition(format!("no snapshots in {}", dir.display())))
}
