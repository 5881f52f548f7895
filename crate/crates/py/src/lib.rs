//! Python bindings: `import ufls`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;
use std::path::PathBuf;
use ufls_core::harness::{self, HarnessError};
use ufls_core::pmu::{self, EstimatorConfig};
use ufls_core::relay::{RelayConfig, RelayState, Scheme};
use ufls_core::signal::{self, FrequencyTrajectory, SynthesisParams};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Io(e) => PyIOError::new_err(e.to_string()),
        e => err(e),
    }
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_py_any(py)?,
        },
        Value::String(s) => s.into_py_any(py)?,
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)?
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_py_any(py)?
        }
    })
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(err)?)
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    name.parse().map_err(err)
}

/// A closed-loop contingency scenario.
#[pyclass(module = "ufls", name = "Scenario", skip_from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: harness::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        harness::Scenario::from_json_str(text).map(|inner| Self { inner }).map_err(harness_err)
    }

    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        harness::Scenario::from_path(path).map(|inner| Self { inner }).map_err(harness_err)
    }

    /// Bundled scenario 1 (generator trip) or 2 (larger trip, collapses unprotected).
    #[staticmethod]
    fn bundled(number: u32) -> PyResult<Self> {
        let inner = match number {
            1 => harness::bundled_scenario_1(),
            2 => harness::bundled_scenario_2(),
            n => return Err(PyValueError::new_err(format!("no bundled scenario {n}"))),
        };
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn with_scheme(&self, scheme: &str) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_scheme(parse_scheme(scheme)?) })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn scheme(&self) -> &'static str {
        self.inner.scheme.as_str()
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.inner.duration_s
    }

    #[getter]
    fn buses(&self) -> Vec<String> {
        self.inner.loads.iter().map(|l| l.bus.clone()).collect()
    }

    /// Inertia multiplier applied at run time (calibrated if requested).
    fn inertia_scale(&self) -> PyResult<f64> {
        self.inner.effective_inertia_scale().map_err(harness_err)
    }

    fn run(&self, py: Python<'_>) -> PyResult<PyReport> {
        let s = self.inner.clone();
        py.detach(move || harness::run_scenario(&s)).map(|inner| PyReport { inner }).map_err(harness_err)
    }

    fn __repr__(&self) -> String {
        format!("Scenario(name={:?}, scheme={:?})", self.inner.name, self.inner.scheme.as_str())
    }
}

/// Metrics and traces of one run.
#[pyclass(module = "ufls", name = "Report")]
struct PyReport {
    inner: harness::ScenarioReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn metrics(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.metrics)
    }

    /// `(time_s, coi_frequency_hz)` lists.
    fn coi_frequency(&self) -> (Vec<f64>, Vec<f64>) {
        (self.inner.traces.time.clone(), self.inner.traces.coi_frequency.clone())
    }

    /// `(time_s, shed_mw)` stair points.
    fn shed_mw(&self) -> Vec<(f64, f64)> {
        self.inner.traces.shed_mw.clone()
    }

    fn commands(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.traces.commands)
    }

    /// Frames seen by the relay at `bus`.
    fn frames(&self, bus: &str) -> PyResult<Vec<PyFrame>> {
        let trace = self
            .inner
            .traces
            .buses
            .iter()
            .find(|b| b.bus == bus)
            .ok_or_else(|| PyValueError::new_err(format!("unknown bus {bus:?}")))?;
        Ok(trace.frames.iter().map(|&f| PyFrame { inner: f }).collect())
    }

    fn write(&self, out: PathBuf) -> PyResult<()> {
        harness::write_report(&self.inner, &out).map_err(harness_err)
    }
}

/// One PMU report.
#[pyclass(module = "ufls", name = "Frame", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFrame {
    inner: pmu::Frame,
}

#[pymethods]
impl PyFrame {
    #[new]
    #[pyo3(signature = (timestamp, frequency, rocof, magnitude=1.0, phase=0.0, rocof_valid=true, valid=true))]
    fn new(
        timestamp: f64,
        frequency: f64,
        rocof: f64,
        magnitude: f64,
        phase: f64,
        rocof_valid: bool,
        valid: bool,
    ) -> Self {
        Self { inner: pmu::Frame { timestamp, magnitude, phase, frequency, rocof, rocof_valid, valid } }
    }

    #[getter]
    fn timestamp(&self) -> f64 {
        self.inner.timestamp
    }
    #[getter]
    fn magnitude(&self) -> f64 {
        self.inner.magnitude
    }
    #[getter]
    fn phase(&self) -> f64 {
        self.inner.phase
    }
    #[getter]
    fn frequency(&self) -> f64 {
        self.inner.frequency
    }
    #[getter]
    fn rocof(&self) -> f64 {
        self.inner.rocof
    }
    #[getter]
    fn rocof_valid(&self) -> bool {
        self.inner.rocof_valid
    }
    #[getter]
    fn valid(&self) -> bool {
        self.inner.valid
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame(t={:.3}, f={:.6}, rocof={:.4}, valid={})",
            self.inner.timestamp, self.inner.frequency, self.inner.rocof, self.inner.valid
        )
    }
}

/// Per-bus load-shedding relay.
#[pyclass(module = "ufls", name = "Relay")]
struct PyRelay {
    inner: RelayState,
}

#[pymethods]
impl PyRelay {
    #[new]
    #[pyo3(signature = (bus, scheme="rocof_a"))]
    fn new(bus: &str, scheme: &str) -> PyResult<Self> {
        let cfg = RelayConfig::for_scheme(parse_scheme(scheme)?);
        RelayState::new(bus, cfg).map(|inner| Self { inner }).map_err(err)
    }

    /// Feeds one frame; returns the command it provokes, if any.
    fn on_frame(&mut self, py: Python<'_>, frame: &PyFrame) -> PyResult<Option<Py<PyAny>>> {
        self.inner.on_frame(&frame.inner).map(|c| to_py(py, &c)).transpose()
    }

    #[getter]
    fn level(&self) -> usize {
        self.inner.level()
    }

    #[getter]
    fn serve_factor(&self) -> u8 {
        self.inner.serve_factor()
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

fn estimator(window_cycles: u32, sample_rate: u32, iterations: u32) -> EstimatorConfig {
    EstimatorConfig { window_cycles, sample_rate, eipdft_iterations: iterations, ..EstimatorConfig::default() }
}

/// Synthesizes a waveform following piecewise-linear `(time_s, hz)` breakpoints.
#[pyfunction]
#[pyo3(signature = (breakpoints, duration, amplitude=1.0, phase0=0.0, noise_std=0.0, seed=0, sample_rate=10_000))]
fn synthesize(
    breakpoints: Vec<(f64, f64)>,
    duration: f64,
    amplitude: f64,
    phase0: f64,
    noise_std: f64,
    seed: u64,
    sample_rate: u32,
) -> PyResult<Vec<f64>> {
    let traj = FrequencyTrajectory::new(breakpoints).map_err(err)?;
    let params = SynthesisParams { amplitude, phase0, noise_std, seed, sample_rate };
    Ok(signal::synthesize(&traj, &params, duration).map_err(err)?.samples)
}

/// Runs the PMU over a sample vector whose first sample is at `t0`.
#[pyfunction]
#[pyo3(signature = (samples, t0=0.0, sample_rate=10_000, window_cycles=3, iterations=2))]
fn run_pmu(
    samples: Vec<f64>,
    t0: f64,
    sample_rate: u32,
    window_cycles: u32,
    iterations: u32,
) -> PyResult<Vec<PyFrame>> {
    let stream = signal::SampleStream { sample_rate, t0, samples };
    let frames = pmu::run_pmu(&stream, &estimator(window_cycles, sample_rate, iterations)).map_err(err)?;
    Ok(frames.into_iter().map(|inner| PyFrame { inner }).collect())
}

/// Error metrics on the 45 → 55 Hz, 1 Hz/s ramp.
#[pyfunction]
#[pyo3(signature = (iterations=2))]
fn compliance_ramp_test(py: Python<'_>, iterations: u32) -> PyResult<Py<PyAny>> {
    let cfg = EstimatorConfig { eipdft_iterations: iterations, ..EstimatorConfig::default() };
    let report = py.detach(|| pmu::compliance_ramp_test(&cfg)).map_err(err)?;
    to_py(py, &report)
}

/// Runs `scenario` under each scheme; results keep the input order.
#[pyfunction]
fn compare(py: Python<'_>, scenario: &PyScenario, schemes: Vec<String>) -> PyResult<Vec<PyReport>> {
    let schemes = schemes.iter().map(|s| parse_scheme(s)).collect::<PyResult<Vec<_>>>()?;
    let s = scenario.inner.clone();
    let reports = py.detach(move || harness::compare_schemes(&s, &schemes)).map_err(harness_err)?;
    Ok(reports.into_iter().map(|inner| PyReport { inner }).collect())
}

/// Trapezoidal integral of `(time_s, mw)` points, in MWh.
#[pyfunction]
fn curtailed_energy(points: Vec<(f64, f64)>) -> f64 {
    harness::curtailed_energy(&points)
}

#[pymodule]
fn ufls(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NOMINAL_FREQUENCY", ufls_core::NOMINAL_FREQUENCY)?;
    m.add("SCHEMES", Scheme::ALL.iter().map(|s| s.as_str()).collect::<Vec<_>>())?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyRelay>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(run_pmu, m)?)?;
    m.add_function(wrap_pyfunction!(compliance_ramp_test, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(curtailed_energy, m)?)?;
    Ok(())
}
