use serde::{Deserialize, Serialize};

use crate::dynamics::{StepRecord, Trajectory};

/// Per-step monotonicity and cumulative balance of the discrete energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyInequalityReport {
    pub steps: usize,
    pub passed: bool,
    /// Step with the largest `E_{n+1} - E_n - tol_n` (1-based step index).
    pub worst_step: usize,
    /// Largest `E_{n+1} - E_n - tol_n`; positive means a violation.
    pub worst_excess: f64,
    /// `max_n |E(t_n) + sum_k dt D_k - E(0)|`.
    pub balance_residual: f64,
    /// `balance_residual / dt`, the first-order constant.
    pub balance_constant: f64,
}

/// Relative tolerance of the per-step check: `E_{n+1} <= E_n + rel (1 + |E_n|)`.
pub const STEP_TOL: f64 = 1e-8;

pub fn check_energy_inequality(traj: &Trajectory) -> EnergyInequalityReport {
    check_records(&traj.records, traj.dt, STEP_TOL)
}

/// `records[0]` is the initial state; its dissipation is not part of the balance.
pub fn check_records(records: &[StepRecord], dt: f64, rel_tol: f64) -> EnergyInequalityReport {
    let mut worst_step = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut balance_residual: f64 = 0.0;
    let mut finite = true;
    if let Some(first) = records.first() {
        let e0 = first.e_total;
        let mut dissipated = 0.0;
        for (k, w) in records.windows(2).enumerate() {
            let (prev, next) = (&w[0], &w[1]);
            let excess = next.e_total - prev.e_total - rel_tol * (1.0 + prev.e_total.abs());
            finite &= next.e_total.is_finite();
            if excess > worst_excess || excess.is_nan() {
                worst_excess = excess;
                worst_step = k + 1;
            }
            dissipated += dt * next.dissipation();
            balance_residual = balance_residual.max((next.e_total + dissipated - e0).abs());
        }
    }
    let steps = records.len().saturating_sub(1);
    if steps == 0 {
        worst_excess = 0.0;
    }
    EnergyInequalityReport {
        steps,
        passed: finite && worst_excess <= 0.0,
        worst_step,
        worst_excess,
        balance_residual,
        balance_constant: if dt > 0.0 { balance_residual / dt } else { 0.0 },
    }
}

/// Observed order `log2(r(dt) / r(dt/2))` from residuals at successively halved steps.
pub fn observed_orders(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}
