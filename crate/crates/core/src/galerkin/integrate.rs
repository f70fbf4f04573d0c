use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::MaterialModel;

use super::basis::CosineBasis;
use super::system::{check_model, energy_galerkin, resolution_defect, rhs_unchecked, GalerkinState, RESOLUTION_TOL};

/// Diagnostics at one output time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinRecord {
    pub t: f64,
    pub energy: f64,
    pub dissipation: f64,
    /// `int_0^t D`, integrated alongside the coefficients.
    pub dissipated: f64,
    pub constant_mode: f64,
}

#[derive(Clone, Debug)]
pub struct GalerkinRun {
    pub states: Vec<GalerkinState>,
    pub records: Vec<GalerkinRecord>,
    pub accepted: usize,
    pub rejected: usize,
}

impl GalerkinRun {
    pub fn final_state(&self) -> &GalerkinState {
        self.states.last().expect("run holds the initial state")
    }

    /// `max_t (E(t) + int_0^t D) / E(0) - 1`; relative to `max(|E(0)|, tiny)`.
    pub fn energy_excess(&self) -> f64 {
        let e0 = self.records[0].energy;
        let scale = e0.abs().max(f64::MIN_POSITIVE);
        self.records
            .iter()
            .map(|r| (r.energy + r.dissipated - e0) / scale)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Rhs<'a> {
    basis: &'a CosineBasis,
    material: &'a MaterialModel,
    m: usize,
}

impl Rhs<'_> {
    /// `y = [phi, q, int D]`.
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (phi, rest) = y.split_at(self.m);
        let r = rhs_unchecked(self.basis, self.material, phi, &rest[..self.m])?;
        let mut out = r.dphi;
        out.extend_from_slice(&r.dq);
        out.push(r.dissipation);
        Ok(out)
    }
}

fn record(basis: &CosineBasis, material: &MaterialModel, s: &GalerkinState, dissipated: f64) -> Result<GalerkinRecord> {
    let e = energy_galerkin(s, basis, material)?;
    Ok(GalerkinRecord {
        t: s.t,
        energy: e.e_total,
        dissipation: e.dissipation(),
        dissipated,
        constant_mode: s.phi[0],
    })
}

/// Adaptive Dormand–Prince integration to `t_end`, stopping at `outputs`
/// equally spaced times. The quadrature resolution is checked at every output.
pub fn integrate_galerkin(
    initial: &GalerkinState,
    basis: &CosineBasis,
    material: &MaterialModel,
    t_end: f64,
    rtol: f64,
    outputs: usize,
) -> Result<GalerkinRun> {
    check_model(material)?;
    if !(rtol > 0.0) {
        return Err(Error::Precondition(format!("rtol = {rtol} must be positive")));
    }
    if !(t_end > initial.t) {
        return Err(Error::Precondition(format!(
            "t_end = {t_end} must exceed t = {}",
            initial.t
        )));
    }
    let m = basis.size();
    if initial.phi.len() != m || initial.q.len() != m {
        return Err(Error::Precondition(
            "initial coefficients do not match the basis".into(),
        ));
    }
    let f = Rhs { basis, material, m };
    let atol = rtol * 1e-3;
    let mut y: Vec<f64> = initial.phi.iter().chain(&initial.q).copied().chain([0.0]).collect();
    let mut t = initial.t;
    let state_of = |t: f64, y: &[f64]| -> Result<GalerkinState> {
        let mut s = GalerkinState::new(basis, material, y[..m].to_vec(), y[m..2 * m].to_vec())?;
        s.t = t;
        Ok(s)
    };
    let check = |s: &GalerkinState| -> Result<()> {
        let (_, defect) = resolution_defect(basis, material, &s.phi, &s.q)?;
        if defect > RESOLUTION_TOL {
            return Err(Error::QuadratureUnderResolved {
                difference: defect,
                threshold: RESOLUTION_TOL,
            }
            .at(s.t));
        }
        Ok(())
    };
    let first = state_of(t, &y)?;
    check(&first)?;
    let mut records = vec![record(basis, material, &first, 0.0)?];
    let mut states = vec![first];
    let outputs = outputs.max(1);
    let span = t_end - initial.t;
    let mut k1 = f.eval(&y)?;
    let norm0 = y.iter().chain(&k1).fold(0.0f64, |a, x| a.max(x.abs()));
    let mut h = (0.01 * span).min(if norm0 > 0.0 { 0.1 / norm0.max(1.0) } else { span });
    let (mut accepted, mut rejected) = (0, 0);
    for out in 1..=outputs {
        let target = initial.t + span * out as f64 / outputs as f64;
        while t < target {
            let last = target - t <= h * (1.0 + 1e-12);
            let step = if last { target - t } else { h };
            if step < 1e-14 * (1.0 + t.abs()) {
                return Err(Error::StepSizeUnderflow { t, h: step });
            }
            let mut k = vec![k1.clone()];
            let mut stage = vec![0.0; y.len()];
            for s in 1..7 {
                for i in 0..y.len() {
                    stage[i] = y[i] + step * (0..s).map(|r| A[s][r] * k[r][i]).sum::<f64>();
                }
                match f.eval(&stage) {
                    Ok(v) => k.push(v),
                    Err(e) if e.is_numerical() => {
                        k.clear();
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            let mut err = f64::INFINITY;
            let mut y5 = stage.clone();
            if k.len() == 7 {
                err = 0.0;
                for i in 0..y.len() {
                    y5[i] = y[i] + step * (0..7).map(|r| B5[r] * k[r][i]).sum::<f64>();
                    let y4 = y[i] + step * (0..7).map(|r| B4[r] * k[r][i]).sum::<f64>();
                    let sc = atol + rtol * y[i].abs().max(y5[i].abs());
                    err = err.max(((y5[i] - y4) / sc).abs());
                }
                if !err.is_finite() {
                    err = f64::INFINITY;
                }
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                k1 = k.pop().expect("seven stages");
                accepted += 1;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = step * grow;
                } else {
                    h = h.max(step * grow.min(1.0));
                }
            } else {
                rejected += 1;
                h = step
                    * if err.is_finite() {
                        (0.9 * err.powf(-0.2)).max(0.1)
                    } else {
                        0.1
                    };
            }
        }
        let s = state_of(t, &y)?;
        if !s.is_finite() {
            return Err(Error::BlowUp {
                t,
                detail: "Galerkin coefficients became non-finite".into(),
            });
        }
        check(&s)?;
        records.push(record(basis, material, &s, y[2 * m])?);
        states.push(s);
    }
    Ok(GalerkinRun {
        states,
        records,
        accepted,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{BulkModulus, Potential, ScalarLaw};

    #[test]
    fn constant_stress_decays_exponentially() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 1).unwrap();
        let mut m = MaterialModel::regular_default();
        m.relaxation = ScalarLaw::Constant(0.7);
        let s = GalerkinState::new(&b, &m, vec![0.2], vec![1.3]).unwrap();
        let run = integrate_galerkin(&s, &b, &m, 2.0, 1e-11, 20).unwrap();
        for st in &run.states {
            let exact = 1.3 * (-st.t / 0.7).exp();
            assert!(
                (st.q[0] - exact).abs() <= 1e-8 * exact,
                "t={} {} vs {exact}",
                st.t,
                st.q[0]
            );
            assert_eq!(st.phi[0], 0.2);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let b = CosineBasis::new(2, &[1.0, 1.0], 6).unwrap();
        let m = MaterialModel::regular_default();
        let s = GalerkinState::new(&b, &m, vec![0.0; 6], vec![0.0; 6]).unwrap();
        let run = integrate_galerkin(&s, &b, &m, 0.5, 1e-8, 5).unwrap();
        assert!(run
            .final_state()
            .phi
            .iter()
            .chain(&run.final_state().q)
            .all(|&x| x == 0.0));
    }

    #[test]
    fn linear_modes_decay_at_biharmonic_rate() {
        let b = CosineBasis::new(1, &[1.0], 5).unwrap();
        let mut m = MaterialModel::regular_default();
        m.potential = Potential::Zero;
        m.bulk = BulkModulus::Constant(0.0);
        m.c0 = 1e-2;
        let phi = vec![0.5, 0.1, -0.2, 0.05, 0.3];
        let s = GalerkinState::new(&b, &m, phi.clone(), vec![0.0; 5]).unwrap();
        let run = integrate_galerkin(&s, &b, &m, 0.3, 1e-11, 3).unwrap();
        let end = run.final_state();
        for j in 0..5 {
            let l = b.eigenvalues()[j];
            let exact = phi[j] * (-m.c0 * l * l * end.t).exp();
            assert!((end.phi[j] - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let b = CosineBasis::new(1, &[1.0], 2).unwrap();
        let m = MaterialModel::regular_default();
        let s = GalerkinState::zeros(2);
        assert!(integrate_galerkin(&s, &b, &m, 1.0, 0.0, 1).is_err());
        assert!(integrate_galerkin(&s, &b, &m, 0.0, 1e-6, 1).is_err());
        assert!(integrate_galerkin(&GalerkinState::zeros(3), &b, &m, 1.0, 1e-6, 1).is_err());
    }
}
