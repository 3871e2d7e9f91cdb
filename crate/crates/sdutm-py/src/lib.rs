// SPDX-License-Identifier: Apache-2.0
//! Python bindings: named-problem solves, pairing validation and the JSON
//! command interface of the harness.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use sdutm::harness::{cmd_bench, cmd_converge, cmd_solve, cmd_validate, run_solver, Resolved, RunConfig, SolverKind};
use sdutm::problem::{BcKind, EquationKind, StencilKind};
use sdutm::registry::NAMES;

create_exception!(pysdutm, SdutmError, PyException);

fn to_py(e: sdutm::Error) -> PyErr {
    let code = e.reason().unwrap_or(e.code());
    SdutmError::new_err((code.to_string(), e.to_string()))
}

/// Names of the built-in reference problems.
#[pyfunction]
fn problems() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Solve a named problem on N interior nodes; returns (x, q) lists.
#[pyfunction]
#[pyo3(signature = (problem, n, t, solver = "sdutm-series", dt = None, tol = 1e-10))]
fn solve(problem: &str, n: usize, t: f64, solver: &str, dt: Option<f64>, tol: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let resolved = Resolved::new(&sdutm::harness::ProblemRef::Named(problem.to_string())).map_err(to_py)?;
    let spec = resolved.spec(n).map_err(to_py)?;
    let kind = SolverKind::parse(solver).map_err(to_py)?;
    let oracle = if kind == SolverKind::Oracle { Some(resolved.oracle().map_err(to_py)?) } else { None };
    let field = run_solver(&spec, kind, t, dt.or(resolved.default_dt), tol, oracle.as_ref()).map_err(to_py)?;
    Ok((spec.grid.nodes(), field.values))
}

/// Max-norm error of a named problem's solver output against its exact solution.
#[pyfunction]
#[pyo3(signature = (problem, n, t, solver = "sdutm-series", dt = None, tol = 1e-10))]
fn error(problem: &str, n: usize, t: f64, solver: &str, dt: Option<f64>, tol: f64) -> PyResult<f64> {
    let resolved = Resolved::new(&sdutm::harness::ProblemRef::Named(problem.to_string())).map_err(to_py)?;
    let spec = resolved.spec(n).map_err(to_py)?;
    let oracle = resolved.oracle().map_err(to_py)?;
    let kind = SolverKind::parse(solver).map_err(to_py)?;
    let field = run_solver(&spec, kind, t, dt.or(resolved.default_dt), tol, Some(&oracle)).map_err(to_py)?;
    Ok(oracle.max_error(&field))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(text.to_string()))
        .map_err(|_| SdutmError::new_err(("invalid-argument".to_string(), format!("unknown {what} '{text}'"))))
}

/// Pairing check; returns (accepted, reason).
#[pyfunction]
#[pyo3(signature = (equation, stencil, left = None, right = None, speed = 1.0))]
fn validate(equation: &str, stencil: &str, left: Option<&str>, right: Option<&str>, speed: f64) -> PyResult<(bool, String)> {
    let eq = match equation {
        "advection-right" => EquationKind::AdvectionRight { c: speed },
        "advection-left" => EquationKind::AdvectionLeft { c: speed },
        "heat" => EquationKind::Heat,
        "linear-schrodinger" => EquationKind::LinearSchrodinger,
        other => return Err(SdutmError::new_err(("invalid-argument".to_string(), format!("unknown equation '{other}'")))),
    };
    let st: StencilKind = parse(stencil, "stencil")?;
    let l: Option<BcKind> = left.map(|s| parse(s, "boundary kind")).transpose()?;
    let r: Option<BcKind> = right.map(|s| parse(s, "boundary kind")).transpose()?;
    let report = sdutm::validate_discretization(eq, st, l, r);
    Ok((report.accepted, report.reason.to_string()))
}

/// Run a harness command on a JSON config; returns (csv, summary_json).
#[pyfunction]
fn run(command: &str, config_json: &str) -> PyResult<(String, String)> {
    let config = RunConfig::from_json(config_json).map_err(to_py)?;
    let report = match command {
        "solve" => cmd_solve(&config),
        "converge" => cmd_converge(&config),
        "bench" => cmd_bench(&config),
        "validate" => cmd_validate(&config),
        other => {
            return Err(SdutmError::new_err(("invalid-argument".to_string(), format!("unknown command '{other}'"))))
        }
    }
    .map_err(to_py)?;
    Ok((report.csv, report.summary.to_string()))
}

#[pymodule]
fn pysdutm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SdutmError", m.py().get_type::<SdutmError>())?;
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(error, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
