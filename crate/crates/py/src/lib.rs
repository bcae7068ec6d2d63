//! Python bindings. Configurations go in as JSON strings or plain dicts and
//! results come back as Python objects.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;

use ::hvtorus::cli::{self, CliError, RunConfig};
use ::hvtorus::constructions::{classify_t_rho as classify, ConstructionDescriptor, LaurentAlg};
use ::hvtorus::exppoly::RhoSpec;
use ::hvtorus::lattice::{det2, is_zbasis as zbasis, lv, BasisPair};

fn to_err(e: CliError) -> PyErr {
    match e {
        CliError::Config(_) | CliError::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(s.to_str()?.to_owned());
    }
    let json = obj.py().import("json")?;
    json.call_method1("dumps", (obj,))?.extract()
}

fn parse<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    serde_json::from_str(&json_text(obj)?).map_err(|e| PyValueError::new_err(format!("config error: {e}")))
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Bracket of two elements in the element syntax, rendered canonically.
#[pyfunction]
fn bracket(left: &str, right: &str) -> PyResult<String> {
    let out = cli::cmd_bracket(left, right).map_err(to_err)?;
    Ok(out.csv.trim_end().to_owned())
}

#[pyfunction]
fn is_zbasis(b1: (i64, i64), b2: (i64, i64)) -> bool {
    zbasis(lv(b1.0, b1.1), lv(b2.0, b2.1))
}

#[pyfunction]
fn det(b1: (i64, i64), b2: (i64, i64)) -> i64 {
    det2(lv(b1.0, b1.1), lv(b2.0, b2.1))
}

#[pyfunction]
#[pyo3(signature = (window = 5, trials = 1000, seed = 0))]
fn jacobi_fuzz<'py>(py: Python<'py>, window: i64, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let out = cli::cmd_jacobi_fuzz(window, trials, seed).map_err(to_err)?;
    loads(py, &out.json)
}

/// Dimension table of a construction descriptor.
#[pyfunction]
fn dims<'py>(py: Python<'py>, construction: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let c: ConstructionDescriptor = parse(construction)?;
    let out = py.detach(|| cli::cmd_dims(&c)).map_err(to_err)?;
    loads(py, &out.json)
}

/// Runs an experiment config (the `experiment` section or a full run config).
#[pyfunction]
fn experiment<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let text = json_text(config)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("config error: {e}")))?;
    let cfg: RunConfig = if value.get("experiment").is_some_and(|v| v.is_object()) {
        serde_json::from_value(value)
    } else {
        serde_json::from_value(serde_json::json!({ "experiment": value }))
    }
    .map_err(|e| PyValueError::new_err(format!("config error: {e}")))?;
    let out = py.detach(|| cli::cmd_experiment(&cfg)).map_err(to_err)?;
    let report = loads(py, &out.json)?;
    let res = pyo3::types::PyDict::new(py);
    res.set_item("verdict", out.verdict)?;
    res.set_item("report", report)?;
    Ok(res.into_any())
}

/// r and irreducibility of T_ρ over H_b1, E_b1 or t_b1.
#[pyfunction]
#[pyo3(signature = (rho, window, alg = "H_b1"))]
fn classify_t_rho<'py>(py: Python<'py>, rho: &Bound<'py, PyAny>, window: i64, alg: &str) -> PyResult<Bound<'py, PyAny>> {
    let rho: RhoSpec = parse(rho)?;
    let alg: LaurentAlg = serde_json::from_value(serde_json::Value::String(alg.into()))
        .map_err(|e| PyValueError::new_err(format!("unknown subalgebra {alg}: {e}")))?;
    let class = classify(&rho, alg, &BasisPair::standard(), window).map_err(|e| PyValueError::new_err(e.to_string()))?;
    loads(py, &serde_json::to_string(&class).expect("serializable"))
}

#[pymodule]
fn hvtorus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(is_zbasis, m)?)?;
    m.add_function(wrap_pyfunction!(det, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_fuzz, m)?)?;
    m.add_function(wrap_pyfunction!(dims, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add_function(wrap_pyfunction!(classify_t_rho, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
