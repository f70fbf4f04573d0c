use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted exponential bound `E_rel(t) + 1/2 int_0^t D <= E_rel(0) exp(C t) (1 + residual)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GronwallFit {
    Exponential {
        c: f64,
        residual: f64,
    },
    /// `E_rel(0) = 0`: the bound degenerates to `E_rel(t) <= atol`.
    Coinciding {
        max_e_rel: f64,
        atol: f64,
        holds: bool,
    },
}

impl GronwallFit {
    pub fn residual(&self) -> Option<f64> {
        match self {
            GronwallFit::Exponential { residual, .. } => Some(*residual),
            GronwallFit::Coinciding { .. } => None,
        }
    }
}

/// Cumulative `1/2 int_0^t D` by the trapezoid rule.
fn half_integral(t: &[f64], d: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; t.len()];
    for k in 1..t.len() {
        acc[k] = acc[k - 1] + 0.25 * (t[k] - t[k - 1]) * (d[k] + d[k - 1]);
    }
    acc
}

/// Least-squares exponent through the origin of `log(y_n / y_0)` against `t_n`,
/// with `y = E_rel + 1/2 int D`; the residual is the largest relative overshoot.
pub fn gronwall_fit(t: &[f64], e_rel: &[f64], dissipation: &[f64], atol: f64) -> Result<GronwallFit> {
    if t.len() != e_rel.len() || t.len() != dissipation.len() || t.is_empty() {
        return Err(Error::Precondition(
            "gronwall_fit needs equally long, non-empty series".into(),
        ));
    }
    if e_rel.iter().chain(dissipation).any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Precondition(
            "relative energy and dissipation must be finite and non-negative".into(),
        ));
    }
    if e_rel[0] == 0.0 {
        let max_e_rel = e_rel.iter().fold(0.0, |a: f64, &b| a.max(b));
        return Ok(GronwallFit::Coinciding {
            max_e_rel,
            atol,
            holds: max_e_rel <= atol,
        });
    }
    let acc = half_integral(t, dissipation);
    let y0 = e_rel[0];
    let (mut num, mut den) = (0.0, 0.0);
    for k in 1..t.len() {
        let s = t[k] - t[0];
        num += s * ((e_rel[k] + acc[k]) / y0).ln();
        den += s * s;
    }
    let c = if den > 0.0 { num / den } else { 0.0 };
    let residual = (1..t.len())
        .map(|k| (e_rel[k] + acc[k]) / (y0 * (c * (t[k] - t[0])).exp()) - 1.0)
        .fold(0.0, f64::max);
    Ok(GronwallFit::Exponential { c, residual })
}
