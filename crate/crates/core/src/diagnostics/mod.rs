//! Energy, relative energy, Gronwall fits and phase-bound reports.

mod bounds;
mod energy;
mod gronwall;
mod inequality;
mod relative;
mod report;

pub use bounds::{bounds_report, near_degenerate_measure, BoundsReport};
pub use energy::{energy, mixing_energy, EnergyBreakdown};
pub use gronwall::{gronwall_fit, GronwallFit};
pub use inequality::{check_energy_inequality, check_records, observed_orders, EnergyInequalityReport, STEP_TOL};
pub use relative::{relative_energy, RelativeEnergyReport};
pub use report::{Check, Report};
