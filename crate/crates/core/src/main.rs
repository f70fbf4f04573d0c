use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use viscophase::cli::{
    apply_overrides, cmd_degenerate_sweep, cmd_galerkin, cmd_report, cmd_run, cmd_weakstrong, exit_code,
    parse_run_config, CommandOutcome, RunConfig,
};
use viscophase::{Error, Result};

/// Viscoelastic phase separation with bulk stress: simulation and diagnostics.
#[derive(Parser)]
#[command(name = "viscophase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and check mass, energy and incompressibility.
    Run(Common),
    /// Relative-energy twin runs against perturbed initial data.
    Weakstrong(Common),
    /// Cosine-Galerkin convergence study.
    Galerkin(Common),
    /// Degenerate-regime runs over decreasing regularization.
    DegenerateSweep(Common),
    /// Re-check a finished run directory.
    Report { dir: PathBuf },
}

fn load(c: &Common) -> Result<RunConfig> {
    let text = match &c.config {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", p.display()),
        })?,
        None => String::new(),
    };
    let mut overrides = c.overrides.clone();
    if let Some(s) = c.seed {
        overrides.push(format!("seed={s}"));
    }
    parse_run_config(&apply_overrides(&text, &overrides)?)
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("VISCOPHASE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Precondition(format!("VISCOPHASE_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Precondition(format!("cannot size the thread pool: {e}")))
}

fn dispatch(cmd: &Command) -> Result<CommandOutcome> {
    configure_threads()?;
    let with = |c: &Common, f: fn(&RunConfig, &Path) -> Result<CommandOutcome>| f(&load(c)?, &c.out);
    match cmd {
        Command::Run(c) => with(c, cmd_run),
        Command::Weakstrong(c) => with(c, cmd_weakstrong),
        Command::Galerkin(c) => with(c, cmd_galerkin),
        Command::DegenerateSweep(c) => with(c, cmd_degenerate_sweep),
        Command::Report { dir } => cmd_report(dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(&cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.render());
            outcome.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
