//! Python bindings: configuration text in, plain lists and dicts out.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use viscophase::cli::{emit_config, galerkin_study, parse_run_config, weak_strong, RunConfig};
use viscophase::diagnostics::{gronwall_fit, relative_energy, GronwallFit};
use viscophase::dynamics::{Simulation, StepRecord};
use viscophase::material::MaterialModel;
use viscophase::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn record_dict<'py>(py: Python<'py>, r: &StepRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("step", r.step)?;
    d.set_item("t", r.t)?;
    d.set_item("e_mix", r.e_mix)?;
    d.set_item("e_bulk", r.e_bulk)?;
    d.set_item("e_kin", r.e_kin)?;
    d.set_item("e_total", r.e_total)?;
    d.set_item("dissipation", r.dissipation())?;
    d.set_item("mass", r.mass)?;
    d.set_item("min_phi", r.min_phi)?;
    d.set_item("max_phi", r.max_phi)?;
    d.set_item("div_u_norm", r.div_u_norm)?;
    d.set_item("entropy", r.entropy)?;
    Ok(d)
}

/// Parsed run configuration; unset keys take their defaults.
#[pyclass(name = "Config")]
#[derive(Clone)]
struct PyConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyConfig {
            inner: parse_run_config(text).map_err(py_err)?,
        })
    }

    fn emit(&self) -> String {
        emit_config(&self.inner)
    }

    fn material(&self) -> PyMaterial {
        PyMaterial {
            inner: self.inner.sim.material.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!("Config({:?})", self.inner.sim.material.describe())
    }
}

#[pyclass(name = "Material")]
#[derive(Clone)]
struct PyMaterial {
    inner: MaterialModel,
}

#[pymethods]
impl PyMaterial {
    #[staticmethod]
    fn regular() -> Self {
        PyMaterial {
            inner: MaterialModel::regular_default(),
        }
    }

    #[staticmethod]
    fn degenerate(delta: f64) -> PyResult<Self> {
        Ok(PyMaterial {
            inner: MaterialModel::degenerate_default(delta).map_err(py_err)?,
        })
    }

    fn mobility(&self, s: f64) -> f64 {
        self.inner.m(s)
    }

    fn potential(&self, s: f64) -> PyResult<(f64, f64)> {
        let d = self.inner.potential.eval(s).map_err(py_err)?;
        Ok((d.value, d.first))
    }

    fn concavity_bound(&self) -> f64 {
        self.inner.concavity_bound()
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }
}

#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    inner: Simulation,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(config: &PyConfig) -> PyResult<Self> {
        Ok(PySimulation {
            inner: Simulation::from_config(&config.inner.sim).map_err(py_err)?,
        })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.state().t
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    fn is_done(&self) -> bool {
        self.inner.is_done()
    }

    fn record<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        record_dict(py, &self.inner.initial_record().map_err(py_err)?)
    }

    /// Advances one step and returns its diagnostics.
    fn step<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = self.inner.advance().map_err(py_err)?;
        record_dict(py, &r)
    }

    /// Runs to the end and returns the diagnostics of every remaining step.
    fn run<'py>(&mut self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mut out = Vec::new();
        while !self.inner.is_done() {
            let r = self.inner.advance().map_err(py_err)?;
            out.push(record_dict(py, &r)?);
        }
        Ok(out)
    }

    /// Flat row-major copy of `phi`, `q`, `mu` or `p`.
    fn field(&self, name: &str) -> PyResult<Vec<f64>> {
        let s = self.inner.state();
        let f = match name {
            "phi" => &s.phi,
            "q" => &s.q,
            "mu" => &s.mu,
            "p" => &s.p,
            _ => return Err(PyValueError::new_err(format!("unknown field {name:?}"))),
        };
        Ok(f.data().to_vec())
    }

    fn shape(&self) -> Vec<usize> {
        let g = self.inner.state().grid();
        g.n()[..g.dim()].to_vec()
    }

    /// Relative energy of this state with respect to `reference`.
    fn relative_energy<'py>(&self, py: Python<'py>, reference: &PySimulation) -> PyResult<Bound<'py, PyDict>> {
        let r = relative_energy(
            self.inner.state(),
            reference.inner.state(),
            &self.inner.config().material,
        )
        .map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("e_mix", r.e_mix)?;
        d.set_item("e_bulk", r.e_bulk)?;
        d.set_item("e_kin", r.e_kin)?;
        d.set_item("e_total", r.e_total)?;
        d.set_item("dissipation", r.dissipation)?;
        Ok(d)
    }
}

fn fit_dict<'py>(py: Python<'py>, fit: &GronwallFit) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match *fit {
        GronwallFit::Exponential { c, residual } => {
            d.set_item("kind", "exponential")?;
            d.set_item("c", c)?;
            d.set_item("residual", residual)?;
        }
        GronwallFit::Coinciding { max_e_rel, atol, holds } => {
            d.set_item("kind", "coinciding")?;
            d.set_item("max_e_rel", max_e_rel)?;
            d.set_item("atol", atol)?;
            d.set_item("holds", holds)?;
        }
    }
    Ok(d)
}

/// Exponential Gronwall fit of a relative-energy series.
#[pyfunction]
#[pyo3(name = "gronwall_fit", signature = (t, e_rel, dissipation, atol = 1e-10))]
fn py_gronwall_fit<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    e_rel: Vec<f64>,
    dissipation: Vec<f64>,
    atol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = gronwall_fit(&t, &e_rel, &dissipation, atol).map_err(py_err)?;
    fit_dict(py, &fit)
}

/// Twin runs for each perturbation size; returns per-epsilon series and fits.
#[pyfunction]
#[pyo3(name = "weak_strong")]
fn py_weak_strong<'py>(py: Python<'py>, config: &PyConfig, epsilons: Vec<f64>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let sim = config.inner.sim.clone();
    let series = py.allow_threads(|| weak_strong(&sim, &epsilons)).map_err(py_err)?;
    series
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("epsilon", s.epsilon)?;
            d.set_item("t", s.t.clone())?;
            d.set_item("e_rel", s.relative.iter().map(|r| r.e_total).collect::<Vec<_>>())?;
            d.set_item("fit", fit_dict(py, &s.fit)?)?;
            d.set_item("predicted_rate", s.predicted_rate)?;
            Ok(d)
        })
        .collect()
}

type EnergySeries = (usize, Vec<f64>);
type CauchyTriple = (usize, usize, f64);

/// Galerkin convergence study; returns `(energy series per m, Cauchy rows)`.
#[pyfunction]
#[pyo3(name = "galerkin_study", signature = (config, modes, t_end, rtol = 1e-9, outputs = 20))]
fn py_galerkin_study(
    py: Python<'_>,
    config: &PyConfig,
    modes: Vec<usize>,
    t_end: f64,
    rtol: f64,
    outputs: usize,
) -> PyResult<(Vec<EnergySeries>, Vec<CauchyTriple>)> {
    let sim = config.inner.sim.clone();
    let (members, rows) = py
        .allow_threads(|| galerkin_study(&sim, &modes, t_end, rtol, outputs))
        .map_err(py_err)?;
    Ok((
        members
            .iter()
            .map(|m| (m.m, m.run.records.iter().map(|r| r.energy).collect()))
            .collect(),
        rows.iter().map(|r| (r.m_coarse, r.m_fine, r.difference)).collect(),
    ))
}

#[pymodule]
fn viscophase_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PyMaterial>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(py_gronwall_fit, m)?)?;
    m.add_function(wrap_pyfunction!(py_weak_strong, m)?)?;
    m.add_function(wrap_pyfunction!(py_galerkin_study, m)?)?;
    Ok(())
}
