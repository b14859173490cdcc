//! Python bindings for `ehaoi-core`.
//!
//! ```python
//! import ehaoi
//! p = ehaoi.SystemParams(0.5, 1.0, 5, 1)
//! ehaoi.closed_form_penalty(p, "fcfs", ehaoi.Penalty.exponential(0.2))
//! ```

use std::collections::BTreeMap;

use ehaoi_core::asymptotics;
use ehaoi_core::sim::{self, Estimate, Horizon, SampleSummary, SimConfig};
use ehaoi_core::{
    engine, fcfs, qbd, Discipline, Error, ExpPolyDist, PenaltySpec, SystemParams, UpdateProcessStats,
};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ehaoi, EhaoiError, PyException, "Base class of all library errors.");
create_exception!(ehaoi, InvalidParameterError, EhaoiError, "Parameters violate a model invariant.");
create_exception!(ehaoi, PenaltyDivergesError, EhaoiError, "The average penalty is infinite.");
create_exception!(ehaoi, UnsupportedError, EhaoiError, "The combination of options is not supported.");
create_exception!(ehaoi, NotConvergedError, EhaoiError, "The matrix-geometric iteration did not converge.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::UnstableSystem { .. }
        | Error::InvalidCapacity(_)
        | Error::InvalidRate(_)
        | Error::InvalidPenalty(_)
        | Error::InvalidConfig(_)
        | Error::Infeasible(_)
        | Error::DegenerateArgument(_) => InvalidParameterError::new_err(msg),
        Error::PenaltyDiverges(_) | Error::MgfDiverges { .. } => PenaltyDivergesError::new_err(msg),
        Error::UnsupportedPenalty(_) | Error::ModeUnsupported(_) => UnsupportedError::new_err(msg),
        Error::NotConverged { .. } => NotConvergedError::new_err(msg),
        _ => EhaoiError::new_err(msg),
    }
}

fn discipline(s: &str) -> PyResult<Discipline> {
    s.parse().map_err(InvalidParameterError::new_err)
}

/// System parameters: status arrival rate `lam`, energy arrival rate `r`,
/// data buffer `buffer` (K), battery capacity `battery` (B) and an optional
/// exponential service rate `mu`.
#[pyclass(name = "SystemParams", frozen, module = "ehaoi")]
struct PySystemParams(SystemParams);

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (lam, r, buffer, battery, mu = None))]
    fn new(lam: f64, r: f64, buffer: usize, battery: usize, mu: Option<f64>) -> PyResult<Self> {
        let p = SystemParams::new(lam, r, buffer, battery).map_err(to_py)?;
        match mu {
            Some(mu) => Ok(PySystemParams(p.with_service_rate(mu).map_err(to_py)?)),
            None => Ok(PySystemParams(p)),
        }
    }

    /// Parameters with `lam = theta * r`.
    #[staticmethod]
    fn from_theta(theta: f64, r: f64, buffer: usize, battery: usize) -> PyResult<Self> {
        SystemParams::from_theta(theta, r, buffer, battery)
            .map(PySystemParams)
            .map_err(to_py)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }

    #[getter]
    fn buffer(&self) -> usize {
        self.0.buffer
    }

    #[getter]
    fn battery(&self) -> usize {
        self.0.battery
    }

    #[getter]
    fn mu(&self) -> Option<f64> {
        self.0.mu
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    fn with_buffer(&self, buffer: usize) -> PyResult<Self> {
        self.0.with_buffer(buffer).map(PySystemParams).map_err(to_py)
    }

    fn with_battery(&self, battery: usize) -> PyResult<Self> {
        self.0.with_battery(battery).map(PySystemParams).map_err(to_py)
    }

    fn with_service_rate(&self, mu: f64) -> PyResult<Self> {
        self.0.with_service_rate(mu).map(PySystemParams).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        match p.mu {
            Some(mu) => format!(
                "SystemParams(lam={}, r={}, buffer={}, battery={}, mu={mu})",
                p.lambda, p.r, p.buffer, p.battery
            ),
            None => format!(
                "SystemParams(lam={}, r={}, buffer={}, battery={})",
                p.lambda, p.r, p.buffer, p.battery
            ),
        }
    }
}

/// Penalty function applied to the instantaneous AoI.
#[pyclass(name = "Penalty", frozen, from_py_object, module = "ehaoi")]
#[derive(Clone)]
struct PyPenalty(PenaltySpec);

#[pymethods]
impl PyPenalty {
    #[staticmethod]
    fn linear() -> Self {
        PyPenalty(PenaltySpec::linear())
    }

    #[staticmethod]
    fn exponential(alpha: f64) -> PyResult<Self> {
        PenaltySpec::exponential(alpha).map(PyPenalty).map_err(to_py)
    }

    #[staticmethod]
    fn step(beta: f64) -> PyResult<Self> {
        PenaltySpec::step(beta).map(PyPenalty).map_err(to_py)
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id()
    }

    /// `g(delta)`.
    fn value(&self, delta: f64) -> f64 {
        self.0.value(delta)
    }

    /// `G(x) = int_0^x g`.
    fn antiderivative(&self, x: f64) -> f64 {
        self.0.antiderivative(x)
    }

    fn __repr__(&self) -> String {
        format!("Penalty({})", self.0.id())
    }
}

/// Survivor function `P{V > t} = sum_j w_j (a_j t)^n_j / n_j! e^{-a_j t}`
/// plus an atom at zero.
#[pyclass(name = "ExpPolyDist", frozen, module = "ehaoi")]
struct PyDist(ExpPolyDist);

#[pymethods]
impl PyDist {
    #[getter]
    fn atom_at_zero(&self) -> f64 {
        self.0.atom_at_zero
    }

    /// `(weight, power, rate)` for every term.
    #[getter]
    fn terms(&self) -> Vec<(f64, u32, f64)> {
        self.0.terms.iter().map(|t| (t.weight, t.power, t.rate)).collect()
    }

    fn survivor(&self, t: f64) -> f64 {
        self.0.survivor(t)
    }

    fn cdf(&self, t: f64) -> f64 {
        self.0.cdf(t)
    }

    fn moment(&self, m: u32) -> PyResult<f64> {
        self.0.moment(m).map_err(to_py)
    }

    fn mean(&self) -> PyResult<f64> {
        self.0.mean().map_err(to_py)
    }
}

/// Valid-update rate with peak-AoI and sojourn-time distributions.
#[pyclass(name = "UpdateStats", frozen, module = "ehaoi")]
struct PyStats(UpdateProcessStats);

#[pymethods]
impl PyStats {
    #[getter]
    fn valid_rate(&self) -> f64 {
        self.0.valid_rate
    }

    #[getter]
    fn peak(&self) -> PyDist {
        PyDist(self.0.peak.clone())
    }

    #[getter]
    fn sojourn(&self) -> PyDist {
        PyDist(self.0.sojourn.clone())
    }

    /// `(value, method, est_error)` of the average penalty integral.
    fn average_penalty(&self, penalty: &PyPenalty) -> PyResult<(f64, &'static str, f64)> {
        let r = engine::average_penalty(&self.0, &penalty.0).map_err(to_py)?;
        Ok((r.value, r.method.as_str(), r.est_error))
    }
}

#[pyfunction]
fn update_stats(params: &PySystemParams, discipline: &str) -> PyResult<PyStats> {
    ehaoi_core::update_stats(&params.0, self::discipline(discipline)?)
        .map(PyStats)
        .map_err(to_py)
}

/// Long-run average penalty from the closed forms.
#[pyfunction]
fn closed_form_penalty(params: &PySystemParams, discipline: &str, penalty: &PyPenalty) -> PyResult<f64> {
    ehaoi_core::closed_form_penalty(&params.0, self::discipline(discipline)?, &penalty.0).map_err(to_py)
}

/// Average penalty with an unbounded data buffer.
#[pyfunction]
fn asymptotic_penalty(params: &PySystemParams, discipline: &str, penalty: &PyPenalty) -> PyResult<f64> {
    asymptotics::asymptotic_penalty(&params.0, self::discipline(discipline)?, &penalty.0).map_err(to_py)
}

/// Ratio of consecutive penalty gaps in the battery capacity.
#[pyfunction]
fn battery_decay_rate(params: &PySystemParams, discipline: &str, penalty: &PyPenalty) -> PyResult<f64> {
    asymptotics::battery_decay_rate(&params.0, self::discipline(discipline)?, &penalty.0).map_err(to_py)
}

/// Smallest battery keeping the FCFS average AoI at or below `delta_max`.
#[pyfunction]
fn min_battery_for_aoi(lam: f64, r: f64, buffer: usize, delta_max: f64) -> PyResult<usize> {
    fcfs::min_battery_for_aoi(lam, r, buffer, delta_max).map_err(to_py)
}

/// Matrix-geometric solution for exponential service; `params.mu` must be set.
#[pyfunction]
#[pyo3(signature = (params, eps = qbd::DEFAULT_EPS, max_iter = qbd::DEFAULT_MAX_ITER))]
fn qbd_analyze<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    eps: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let r = qbd::analyze(&params.0, eps, max_iter).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("avg_peak_aoi", r.avg_peak_aoi)?;
    d.set_item("mean_sojourn", r.mean_sojourn)?;
    d.set_item("mean_queue_length", r.mean_queue_length)?;
    d.set_item("level_zero_probability", r.level_zero_probability)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("residual", r.residual)?;
    d.set_item("spectral_radius", r.spectral_radius)?;
    Ok(d)
}

fn horizon(valid_updates: Option<u64>, events: Option<u64>, time: Option<f64>) -> PyResult<Horizon> {
    match (valid_updates, events, time) {
        (None, None, None) => Ok(Horizon::ValidUpdates(1_000_000)),
        (Some(n), None, None) => Ok(Horizon::ValidUpdates(n)),
        (None, Some(n), None) => Ok(Horizon::Events(n)),
        (None, None, Some(t)) => Ok(Horizon::Time(t)),
        _ => Err(InvalidParameterError::new_err(
            "give at most one of valid_updates, events, time",
        )),
    }
}

fn estimate<'py>(py: Python<'py>, e: &Estimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", e.value)?;
    d.set_item("std_error", e.std_error)?;
    Ok(d)
}

fn summary<'py>(py: Python<'py>, s: &SampleSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("count", s.count)?;
    d.set_item("mean", estimate(py, &s.mean)?)?;
    d.set_item("second_moment", s.second_moment)?;
    d.set_item("min", s.min)?;
    d.set_item("max", s.max)?;
    d.set_item("zero_fraction", s.zero_fraction())?;
    d.set_item("quantiles", s.quantiles.clone())?;
    Ok(d)
}

/// Discrete-event simulation. Service is exponential when `params.mu` is
/// set and instantaneous otherwise. Returns a dict of estimates.
#[pyfunction]
#[pyo3(signature = (
    params, discipline, valid_updates = None, events = None, time = None,
    seed = 0, warmup = 0.1, penalties = None
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    params: &PySystemParams,
    discipline: &str,
    valid_updates: Option<u64>,
    events: Option<u64>,
    time: Option<f64>,
    seed: u64,
    warmup: f64,
    penalties: Option<Vec<PyPenalty>>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut specs = vec![PenaltySpec::linear()];
    specs.extend(penalties.unwrap_or_default().into_iter().map(|p| p.0));
    let cfg = SimConfig::new(params.0, self::discipline(discipline)?)
        .with_horizon(horizon(valid_updates, events, time)?)
        .with_seed(seed)
        .with_warmup(warmup)
        .with_penalties(specs);
    let res = py.detach(|| sim::run_sim(&cfg)).map_err(to_py)?;

    let d = PyDict::new(py);
    d.set_item("valid_rate", estimate(py, &res.valid_rate_hat)?)?;
    let avg = PyDict::new(py);
    for (id, e) in &res.time_avg_penalty {
        avg.set_item(id, estimate(py, e)?)?;
    }
    d.set_item("time_avg_penalty", avg)?;
    d.set_item("peak", summary(py, &res.peak)?)?;
    d.set_item("sojourn", summary(py, &res.sojourn)?)?;
    d.set_item("interarrival", summary(py, &res.interarrival)?)?;
    d.set_item("elapsed_sim_time", res.elapsed_sim_time)?;
    d.set_item("level_zero_fraction", res.level_zero_fraction)?;
    d.set_item("mean_queue_length", res.mean_queue_length)?;
    let c = &res.counts;
    let counts = PyDict::new(py);
    counts.set_item("events", c.events)?;
    counts.set_item("arrivals", c.arrivals)?;
    counts.set_item("blocked", c.blocked)?;
    counts.set_item("discarded", c.discarded)?;
    counts.set_item("delivered", c.delivered)?;
    counts.set_item("valid_updates", c.valid_updates)?;
    counts.set_item("energy_arrivals", c.energy_arrivals)?;
    counts.set_item("energy_discarded", c.energy_discarded)?;
    d.set_item("counts", counts)?;
    Ok(d)
}

/// Simulated time fractions of `S = q1 - q2` (instantaneous service only).
#[pyfunction]
#[pyo3(signature = (params, discipline, valid_updates = 1_000_000, seed = 0))]
fn state_occupancy(
    py: Python<'_>,
    params: &PySystemParams,
    discipline: &str,
    valid_updates: u64,
    seed: u64,
) -> PyResult<BTreeMap<i64, f64>> {
    let cfg = SimConfig::new(params.0, self::discipline(discipline)?)
        .with_horizon(Horizon::ValidUpdates(valid_updates))
        .with_seed(seed);
    py.detach(|| sim::state_occupancy(&cfg)).map_err(to_py)
}

/// Stationary law of `S = q1 - q2` under instantaneous service.
#[pyfunction]
fn collapsed_state_law(params: &PySystemParams) -> BTreeMap<i64, f64> {
    sim::collapsed_state_law(&params.0)
}

#[pymodule]
fn ehaoi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyPenalty>()?;
    m.add_class::<PyDist>()?;
    m.add_class::<PyStats>()?;
    m.add_function(wrap_pyfunction!(update_stats, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_penalty, m)?)?;
    m.add_function(wrap_pyfunction!(battery_decay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(min_battery_for_aoi, m)?)?;
    m.add_function(wrap_pyfunction!(qbd_analyze, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(state_occupancy, m)?)?;
    m.add_function(wrap_pyfunction!(collapsed_state_law, m)?)?;
    m.add("EhaoiError", py.get_type::<EhaoiError>())?;
    m.add("InvalidParameterError", py.get_type::<InvalidParameterError>())?;
    m.add("PenaltyDivergesError", py.get_type::<PenaltyDivergesError>())?;
    m.add("UnsupportedError", py.get_type::<UnsupportedError>())?;
    m.add("NotConvergedError", py.get_type::<NotConvergedError>())?;
    Ok(())
}
