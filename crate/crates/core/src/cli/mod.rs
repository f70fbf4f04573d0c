//! Configuration files, run manifests and the experiment drivers behind the
//! command-line tool.

mod commands;
mod config;
mod experiments;

pub use commands::{
    cmd_degenerate_sweep, cmd_galerkin, cmd_report, cmd_run, cmd_weakstrong, exit_code, final_snapshot, run_report,
    CommandOutcome, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, MASS_TOL,
};
pub use config::{
    apply_overrides, emit_config, material_fingerprint, parse_config, parse_run_config, ExperimentSettings, RunConfig,
    RunManifest, KEYS,
};
pub use experiments::{
    degenerate_sweep, galerkin_study, material_at_delta, weak_strong, weak_strong_run, GalerkinMember, SweepMember,
    WeakStrongSeries,
};
