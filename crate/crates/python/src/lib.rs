//! Python bindings for the `optlaws` core crate.

use std::fs::File;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use optlaws::cli::{run_simulation, SimulateInput};
use optlaws::features::compute_features;
use optlaws::io::read_runs_csv;
use optlaws::law::{self, fit_with_mode, FitOptions};
use optlaws::schedule::CooldownShape;
use optlaws::validate::run_validation;
use optlaws::{DivergenceParams, FeatureSet, Functional, LawMode, PolicyRule, Powers, SimpleLaw, TrainingConfig, Verdict};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cooldown(name: &str) -> PyResult<CooldownShape> {
    match name {
        "linear" => Ok(CooldownShape::Linear),
        "cosine" => Ok(CooldownShape::Cosine),
        other => Err(PyValueError::new_err(format!("unknown cooldown {other:?}"))),
    }
}

fn functional(name: &str) -> PyResult<Functional> {
    match name {
        "eta" => Ok(Functional::Eta),
        "eta_sq" => Ok(Functional::EtaSq),
        "deta_sq" => Ok(Functional::DetaSq),
        other => Err(PyValueError::new_err(format!("unknown functional {other:?}"))),
    }
}

/// Piecewise learning-rate schedule on `[0, S]`.
#[pyclass(name = "Schedule", frozen, skip_from_py_object)]
struct PySchedule {
    inner: optlaws::Schedule,
}

#[pymethods]
impl PySchedule {
    #[staticmethod]
    #[pyo3(signature = (eta1, eta2, a1, a2, a3, s, cooldown = "linear"))]
    fn general(eta1: f64, eta2: f64, a1: f64, a2: f64, a3: f64, s: f64, cooldown: &str) -> PyResult<Self> {
        let shape = self::cooldown(cooldown)?;
        let inner = optlaws::Schedule::general_with(eta1, eta2, a1, a2, a3, s, shape).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn warmup_cosine(h: f64, a: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: optlaws::Schedule::warmup_cosine(h, a, s).map_err(err)? })
    }

    #[staticmethod]
    fn warmup_constant_cooldown(h: f64, a: f64, a_c: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: optlaws::Schedule::warmup_constant_cooldown(h, a, a_c, s).map_err(err)? })
    }

    #[staticmethod]
    fn constant(eta: f64, s: f64) -> PyResult<Self> {
        Ok(Self { inner: optlaws::Schedule::constant(eta, s).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    #[getter]
    fn markers(&self) -> (f64, f64, f64) {
        let [a1, a2, a3] = self.inner.markers().as_array();
        (a1, a2, a3)
    }

    #[getter]
    fn eta_max(&self) -> f64 {
        self.inner.eta_max()
    }

    fn eval(&self, t: f64) -> PyResult<f64> {
        self.inner.eval(t).map_err(err)
    }

    /// `functional` is one of `eta`, `eta_sq`, `deta_sq`.
    #[pyo3(signature = (u, v, functional = "eta"))]
    fn integral(&self, u: f64, v: f64, functional: &str) -> PyResult<f64> {
        self.inner.integral(u, v, self::functional(functional)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Schedule({})", self.inner)
    }
}

/// The 16 feature values of a schedule for a model of `model` billion parameters.
#[pyfunction]
#[pyo3(signature = (schedule, model, policy = "a1/a3/a2"))]
fn features(schedule: &PySchedule, model: f64, policy: &str) -> PyResult<Vec<f64>> {
    let rule: PolicyRule = policy.parse().map_err(err)?;
    let fv = compute_features(&schedule.inner, &rule.apply(schedule.inner.markers()), model, &Powers::default())
        .map_err(err)?;
    Ok(fv.values().to_vec())
}

/// Fitted loss law.
#[pyclass(name = "Law", frozen)]
struct PyLaw {
    inner: optlaws::FittedLaw,
}

#[pymethods]
impl PyLaw {
    #[staticmethod]
    fn reference() -> Self {
        Self { inner: optlaws::FittedLaw::reference() }
    }

    /// Fits the law to a run-log CSV with sizes in billions of tokens.
    #[staticmethod]
    #[pyo3(signature = (path, policy = "a1/a3/a2", feature_set = "16", continual = false))]
    fn fit_csv(path: &str, policy: &str, feature_set: &str, continual: bool) -> PyResult<Self> {
        let records = read_runs_csv(File::open(path).map_err(err)?).map_err(err)?;
        let options = FitOptions {
            policy: policy.parse().map_err(err)?,
            feature_set: feature_set.parse::<FeatureSet>().map_err(err)?,
            ..FitOptions::default()
        };
        let mode = if continual { LawMode::Continual } else { LawMode::Pretrain };
        Ok(Self { inner: fit_with_mode(&records, options, mode).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.c.to_vec()
    }

    #[getter]
    fn residual_rms(&self) -> f64 {
        self.inner.residual_rms
    }

    #[getter]
    fn condition_number(&self) -> f64 {
        self.inner.condition_number
    }

    /// Returns `(log_loss, loss)`. Rates are raw; sizes are in billions.
    #[pyo3(signature = (model, tokens, eta1, eta2, a1, a2, a3, cooldown = "linear"))]
    #[allow(clippy::too_many_arguments)]
    fn predict(
        &self,
        model: f64,
        tokens: f64,
        eta1: f64,
        eta2: f64,
        a1: f64,
        a2: f64,
        a3: f64,
        cooldown: &str,
    ) -> PyResult<(f64, f64)> {
        let config =
            TrainingConfig { cooldown: self::cooldown(cooldown)?, ..TrainingConfig::new(model, tokens, eta1, eta2, a1, a2, a3) };
        let p = self.inner.predict(&config).map_err(err)?;
        Ok((p.log_loss, p.loss))
    }
}

/// Divergence gate with the default constants. Inputs are normalized.
#[pyfunction]
fn check<'py>(py: Python<'py>, eta_max: f64, warmup: f64, model: f64, tokens: f64) -> PyResult<Bound<'py, PyDict>> {
    let g = DivergenceParams::default().criterion(eta_max, warmup, model, tokens).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("R", g.r)?;
    d.set_item("eta_l", g.eta_l)?;
    d.set_item("verdict", if g.verdict == Verdict::Diverge { "diverge" } else { "stable" })?;
    Ok(d)
}

/// Gap between the cosine and constant-cooldown schedules under the unit simple law.
#[pyfunction]
#[pyo3(signature = (s, r_a = 0.01, r_ac = 0.85, eta_max = 1.0))]
fn cosine_constant_gap(s: f64, r_a: f64, r_ac: f64, eta_max: f64) -> PyResult<f64> {
    law::cosine_constant_gap(&SimpleLaw::unit(), eta_max, r_a, r_ac, s).map_err(err)
}

/// Runs a simulate input given as JSON and returns the report as JSON.
#[pyfunction]
fn simulate(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let input: SimulateInput = serde_json::from_str(config_json).map_err(err)?;
    let (value, _, _) = py.detach(|| run_simulation(&input)).map_err(err)?;
    Ok(value.to_string())
}

/// Reduced validation suite; returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn validate(py: Python<'_>, seed: u64) -> PyResult<String> {
    let report = py.detach(|| run_validation(seed)).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

#[pymodule]
fn optlaws_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchedule>()?;
    m.add_class::<PyLaw>()?;
    m.add_function(wrap_pyfunction!(features, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_constant_gap, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
