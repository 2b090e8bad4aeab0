//! Python bindings for the GRN swarm-pattern toolkit.
//!
//! The module mirrors the CLI's evaluation semantics: concentration inputs
//! are complemented before they reach tree terminals or baseline inputs,
//! exactly as during field evaluation. All errors surface as `ValueError`.

use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use morphoevo_core::ehgrn::EhGrnModel;
use morphoevo_core::genome::GrnTree;
use morphoevo_core::scenario::{Scenario, ScenarioFields};
use morphoevo_core::sim::{run_model, SimConfig, SwarmModel};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn baseline_by_name(name: &str) -> PyResult<EhGrnModel> {
    match name {
        "task1" => Ok(EhGrnModel::task1()),
        "task2" => Ok(EhGrnModel::task2()),
        "task2-silent" => Ok(EhGrnModel::task2_silent()),
        _ => Err(value_err(format!(
            "unknown baseline '{name}' (expected task1, task2, or task2-silent)"
        ))),
    }
}

fn load_scenario(name: &str) -> PyResult<Scenario> {
    if let Some(s) = Scenario::builtin(name) {
        return Ok(s);
    }
    let path = Path::new(name);
    if path.is_file() {
        return Scenario::load(path).map_err(value_err);
    }
    Err(value_err(format!(
        "scenario '{name}' is neither a built-in (channel, channel2, compound) nor a file"
    )))
}

/// Number of nodes in a parsed tree (complexity objective f1).
#[pyfunction]
fn node_count(tree: &str) -> PyResult<usize> {
    Ok(GrnTree::parse(tree).map_err(value_err)?.node_count())
}

/// Canonical text form of a parsed tree.
#[pyfunction]
fn canonical_tree(tree: &str) -> PyResult<String> {
    Ok(GrnTree::parse(tree).map_err(value_err)?.serialize())
}

/// Steady-state tree output for concentrations `x1` (target) and `x2`
/// (obstacle), both in [0, 1].
#[pyfunction]
fn eval_tree(tree: &str, x1: f64, x2: f64) -> PyResult<f64> {
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(value_err("concentrations must be finite"));
    }
    Ok(GrnTree::parse(tree).map_err(value_err)?.eval(1.0 - x1, 1.0 - x2))
}

/// Steady-state baseline output for concentrations `x1` and `x2`.
/// `variant` is one of `task1`, `task2`, `task2-silent`.
#[pyfunction]
fn eval_baseline(variant: &str, x1: f64, x2: f64) -> PyResult<f64> {
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(value_err("concentrations must be finite"));
    }
    Ok(baseline_by_name(variant)?.eval(1.0 - x1, 1.0 - x2))
}

/// Runs a model over every waypoint of a scenario and returns the full run
/// report as a JSON string. `scenario` is a built-in name or a `.scn` path;
/// exactly one of `model` (tree text) and `baseline` (variant name) must be
/// given.
#[pyfunction]
#[pyo3(signature = (scenario, model=None, baseline=None))]
fn simulate_json(
    scenario: &str,
    model: Option<&str>,
    baseline: Option<&str>,
) -> PyResult<String> {
    let swarm = match (model, baseline) {
        (Some(text), None) => SwarmModel::Tree(GrnTree::parse(text).map_err(value_err)?),
        (None, Some(name)) => SwarmModel::Baseline(baseline_by_name(name)?),
        _ => return Err(value_err("give exactly one of model= and baseline=")),
    };
    let fields = ScenarioFields::new(load_scenario(scenario)?).map_err(value_err)?;
    let report = run_model(&swarm, &fields, &SimConfig::default()).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

#[pymodule]
fn morphoevo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(node_count, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_tree, m)?)?;
    m.add_function(wrap_pyfunction!(eval_tree, m)?)?;
    m.add_function(wrap_pyfunction!(eval_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_json, m)?)?;
    Ok(())
}
