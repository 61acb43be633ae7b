//! Python bindings: scenarios and simulation, L1 norms, stability margins
//! and boundary tracing.

use delayctl_core::continuation::{self, ContinuationOptions};
use delayctl_core::linalg::Matrix;
use delayctl_core::norm::{self, DEFAULT_TOL};
use delayctl_core::sim::{self, SimTrace};
use delayctl_core::tf::{self, RationalTf};
use delayctl_core::{Error, ScenarioConfig};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(delayctl, DelayctlError, PyException);
create_exception!(delayctl, StabilityLost, DelayctlError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::StabilityLost { .. } => StabilityLost::new_err(e.to_string()),
        other => DelayctlError::new_err(other.to_string()),
    }
}

/// Serializes through JSON into plain Python dicts and lists.
fn to_object<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| DelayctlError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Plant `(A_m, b)`; the two-state example plant when omitted.
fn plant(a_m: Option<Vec<Vec<f64>>>, b: Option<Vec<f64>>) -> PyResult<(Matrix, Vec<f64>)> {
    let preset = ScenarioConfig::example(0.0, 0.0);
    let a = match a_m {
        Some(rows) => Matrix::from_rows(&rows).map_err(to_py)?,
        None => preset.a_m,
    };
    Ok((a, b.unwrap_or(preset.b)))
}

fn options(tol: f64, tau_max: f64) -> ContinuationOptions {
    ContinuationOptions {
        tol,
        tau_max,
        ..Default::default()
    }
}

/// Closed-loop experiment description.
#[pyclass(module = "delayctl")]
struct Scenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    /// The two-state example scenario at the given delays.
    #[staticmethod]
    #[pyo3(signature = (tau=0.0, tau_hat=0.0))]
    fn example(tau: f64, tau_hat: f64) -> Self {
        Scenario {
            inner: ScenarioConfig::example(tau, tau_hat),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: ScenarioConfig = serde_json::from_str(text).map_err(|e| DelayctlError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(Scenario { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.inner).expect("config serializes")
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }
    #[setter]
    fn set_tau(&mut self, v: f64) {
        self.inner.tau = v;
    }
    #[getter]
    fn tau_hat(&self) -> f64 {
        self.inner.tau_hat
    }
    #[setter]
    fn set_tau_hat(&mut self, v: f64) {
        self.inner.tau_hat = v;
    }
    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }
    #[setter]
    fn set_k(&mut self, v: f64) {
        self.inner.k = v;
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[setter]
    fn set_gamma(&mut self, v: f64) {
        self.inner.gamma = v;
    }
    #[getter]
    fn t_final(&self) -> f64 {
        self.inner.t_final
    }
    #[setter]
    fn set_t_final(&mut self, v: f64) {
        self.inner.t_final = v;
    }
    #[getter]
    fn h_step(&self) -> f64 {
        self.inner.step()
    }
    #[setter]
    fn set_h_step(&mut self, v: Option<f64>) {
        self.inner.h_step = v;
    }
    #[getter]
    fn include_reference(&self) -> bool {
        self.inner.include_reference
    }
    #[setter]
    fn set_include_reference(&mut self, v: bool) {
        self.inner.include_reference = v;
    }

    /// Integrates the closed loop. Releases the GIL while running.
    fn simulate(&self, py: Python<'_>) -> PyResult<Trace> {
        let cfg = self.inner.clone();
        let trace = py.detach(move || sim::simulate_closed_loop(&cfg)).map_err(to_py)?;
        Ok(Trace { inner: trace })
    }

    /// Reference-system bounds and, when the stability condition holds, the
    /// transient constants, as a dict.
    #[pyo3(signature = (tol=DEFAULT_TOL))]
    fn bounds(&self, py: Python<'_>, tol: f64) -> PyResult<Py<PyAny>> {
        self.inner.validate().map_err(to_py)?;
        let report = norm::reference_bounds(&self.inner.reference_bounds_input(tol)).map_err(to_py)?;
        let transient = match self.inner.transient_input(&report, tol) {
            Some(input) => Some(norm::transient_constants(&input).map_err(to_py)?),
            None => None,
        };
        to_object(py, &serde_json::json!({"bounds": report, "transient": transient}))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(tau={}, tau_hat={}, k={}, Gamma={:e}, t_final={})",
            self.inner.tau, self.inner.tau_hat, self.inner.k, self.inner.gamma, self.inner.t_final
        )
    }
}

/// Sampled closed-loop trajectories.
#[pyclass(module = "delayctl", frozen)]
struct Trace {
    inner: SimTrace,
}

#[pymethods]
impl Trace {
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }
    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.inner.x.clone()
    }
    #[getter]
    fn x_hat(&self) -> Vec<Vec<f64>> {
        self.inner.x_hat.clone()
    }
    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }
    #[getter]
    fn theta_hat(&self) -> Vec<Vec<f64>> {
        self.inner.theta_hat.clone()
    }
    #[getter]
    fn sigma_hat(&self) -> Vec<f64> {
        self.inner.sigma_hat.clone()
    }
    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }
    #[getter]
    fn y_des(&self) -> Vec<f64> {
        self.inner.y_des.clone()
    }
    #[getter]
    fn y_ref(&self) -> Option<Vec<f64>> {
        self.inner.y_ref.clone()
    }
    #[getter]
    fn diverged(&self) -> bool {
        self.inner.diverged
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `{max_err, rms_err, osc_freq}` of `y - y_des` from `t_start` on.
    #[pyo3(signature = (t_start=5.0))]
    fn tracking_metrics(&self, py: Python<'_>, t_start: f64) -> PyResult<Py<PyAny>> {
        let m = sim::tracking_metrics(&self.inner, t_start).map_err(to_py)?;
        to_object(py, &m)
    }

    fn sup_x_tilde(&self) -> f64 {
        self.inner.sup_x_tilde()
    }

    fn max_theta_hat_norm(&self) -> f64 {
        self.inner.max_theta_hat_norm()
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path)?;
        self.inner.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    }
}

/// `c_0 .. c_5` of the (5,5) Padé approximant of `e^{-s}`.
#[pyfunction]
fn pade_coefficients() -> Vec<f64> {
    tf::pade_coefficients().to_vec()
}

/// L1 norm of `num / den` (ascending coefficients) as a dict with `value`,
/// `truncation_time`, `tail_bound` and `tolerance`.
#[pyfunction]
#[pyo3(signature = (num, den, tol=DEFAULT_TOL))]
fn l1_norm(py: Python<'_>, num: Vec<f64>, den: Vec<f64>, tol: f64) -> PyResult<Py<PyAny>> {
    let tf = RationalTf::from_coeffs(&num, &den).map_err(to_py)?;
    let r = norm::l1_norm(&tf, tol).map_err(to_py)?;
    to_object(py, &r)
}

/// `f(tau, tau_hat)`; raises `StabilityLost` outside the stable region.
#[pyfunction]
#[pyo3(signature = (k, tau, tau_hat, a_m=None, b=None, tol=DEFAULT_TOL))]
fn compute_f(k: f64, tau: f64, tau_hat: f64, a_m: Option<Vec<Vec<f64>>>, b: Option<Vec<f64>>, tol: f64) -> PyResult<f64> {
    let (a, b) = plant(a_m, b)?;
    norm::compute_f(k, tau, tau_hat, &a, &b, tol).map_err(to_py)
}

/// `g(tau, tau_hat)`.
#[pyfunction]
#[pyo3(signature = (k, tau, tau_hat, tol=DEFAULT_TOL))]
fn compute_g(k: f64, tau: f64, tau_hat: f64, tol: f64) -> PyResult<f64> {
    norm::compute_g(k, tau, tau_hat, tol).map_err(to_py)
}

/// Delay margin along `tau_hat = tau`.
#[pyfunction]
#[pyo3(signature = (k, theta_b=2.0, a_m=None, b=None, tol=DEFAULT_TOL, tau_max=1.0))]
fn find_tau_s(
    py: Python<'_>,
    k: f64,
    theta_b: f64,
    a_m: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    tol: f64,
    tau_max: f64,
) -> PyResult<f64> {
    let (a, b) = plant(a_m, b)?;
    py.detach(|| continuation::find_tau_s(k, &a, &b, theta_b, &options(tol, tau_max)))
        .map_err(to_py)
}

/// `(delta_lower, delta_upper)` around `tau_hat = tau`.
#[pyfunction]
#[pyo3(signature = (k, tau, theta_b=2.0, a_m=None, b=None, tol=DEFAULT_TOL))]
fn delta_band(
    py: Python<'_>,
    k: f64,
    tau: f64,
    theta_b: f64,
    a_m: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    tol: f64,
) -> PyResult<(f64, f64)> {
    let (a, b) = plant(a_m, b)?;
    let band = py
        .detach(|| continuation::delta_band(k, &a, &b, theta_b, tau, &options(tol, 1.0)))
        .map_err(to_py)?;
    Ok((band.delta_lower, band.delta_upper))
}

/// Traces `f = level` from the `tau = 0` axis. Returns a dict with the
/// point columns, fold flags, identity crossings and termination reason.
#[pyfunction]
#[pyo3(signature = (k, level=0.5, a_m=None, b=None, tol=DEFAULT_TOL, tau_max=1.0))]
fn trace_level_curve(
    py: Python<'_>,
    k: f64,
    level: f64,
    a_m: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    tol: f64,
    tau_max: f64,
) -> PyResult<Py<PyAny>> {
    let (a, b) = plant(a_m, b)?;
    let opts = options(tol, tau_max);
    let trace = py
        .detach(|| {
            let start = continuation::find_start_on_axis(k, &a, &b, level, &opts)?;
            continuation::trace_level_curve(k, &a, &b, level, (0.0, start), &opts)
        })
        .map_err(to_py)?;
    let col = |f: fn(&continuation::ContinuationPoint) -> f64| trace.points.iter().map(f).collect::<Vec<_>>();
    to_object(
        py,
        &serde_json::json!({
            "k": trace.k,
            "level": trace.level,
            "tau": col(|p| p.tau),
            "tau_hat": col(|p| p.tau_hat),
            "f": col(|p| p.f_value),
            "is_fold": trace.points.iter().map(|p| p.is_fold).collect::<Vec<_>>(),
            "identity_crossings": trace.identity_crossings(),
            "termination": trace.termination,
        }),
    )
}

#[pymodule]
fn delayctl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DelayctlError", m.py().get_type::<DelayctlError>())?;
    m.add("StabilityLost", m.py().get_type::<StabilityLost>())?;
    m.add_class::<Scenario>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(pade_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(l1_norm, m)?)?;
    m.add_function(wrap_pyfunction!(compute_f, m)?)?;
    m.add_function(wrap_pyfunction!(compute_g, m)?)?;
    m.add_function(wrap_pyfunction!(find_tau_s, m)?)?;
    m.add_function(wrap_pyfunction!(delta_band, m)?)?;
    m.add_function(wrap_pyfunction!(trace_level_curve, m)?)?;
    Ok(())
}
