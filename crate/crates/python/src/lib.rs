//! Python bindings: the gate builders, fidelity sweeps, and validation
//! checks, returned as plain Python structures.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use postfid::fidelity::{fidelity_report, FidelityReport};
use postfid::gates::{
    build_cs, build_ns, cs_composition_check, ns_fidelity_sweep, perfect_conditional_fidelity,
    CsGateSpec, NsGateSpec,
};

fn to_py_err(e: postfid::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn report_to_dict<'py>(py: Python<'py>, report: &FidelityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("eta", report.eta)?;
    d.set_item("click_probability", report.click_probability)?;
    d.set_item("F_r", report.f_r)?;
    d.set_item("F_c", report.f_c)?;
    d.set_item("F_o", report.f_o)?;
    d.set_item("lumped_p_max", report.lumped_p_max)?;
    let outcomes = PyList::empty(py);
    for o in &report.incorrect_outcomes {
        let od = PyDict::new(py);
        od.set_item("counts", o.counts.clone())?;
        od.set_item("p_retr", o.p_retr)?;
        od.set_item("p_max", o.p_max)?;
        od.set_item("overlap", o.overlap)?;
        outcomes.append(od)?;
    }
    d.set_item("incorrect_outcomes", outcomes)?;
    Ok(d)
}

/// Perfect-detection success probability of the NS gate.
#[pyfunction]
fn ns_success_probability() -> f64 {
    postfid::gates::ns_success_probability()
}

/// Full fidelity report for the NS gate with real amplitudes
/// (normalized internally) at one detector efficiency.
#[pyfunction]
fn ns_report<'py>(
    py: Python<'py>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    eta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = NsGateSpec::from_reals(alpha, beta, gamma).map_err(to_py_err)?;
    let reports = ns_fidelity_sweep(&spec, &[eta]).map_err(to_py_err)?;
    report_to_dict(py, &reports[0])
}

/// One report dict per efficiency.
#[pyfunction]
fn ns_sweep<'py>(
    py: Python<'py>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    etas: Vec<f64>,
) -> PyResult<Bound<'py, PyList>> {
    let spec = NsGateSpec::from_reals(alpha, beta, gamma).map_err(to_py_err)?;
    let reports = ns_fidelity_sweep(&spec, &etas).map_err(to_py_err)?;
    let out = PyList::empty(py);
    for r in &reports {
        out.append(report_to_dict(py, r)?)?;
    }
    Ok(out)
}

/// Perfect-detection conditional fidelity of the CS gate for every
/// truth-table input plus the phase-revealing superposition.
#[pyfunction]
fn cs_truth_table<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (c_n, t_n) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
        let gate = build_cs(&CsGateSpec::basis(c_n, t_n).map_err(to_py_err)?).map_err(to_py_err)?;
        let fid = perfect_conditional_fidelity(&gate).map_err(to_py_err)?;
        d.set_item(format!("{c_n}{t_n}"), fid)?;
    }
    let h = Complex64::new(1.0 / std::f64::consts::SQRT_2, 0.0);
    let spec = CsGateSpec::new([Complex64::ZERO, h, Complex64::ZERO, h]).map_err(to_py_err)?;
    let gate = build_cs(&spec).map_err(to_py_err)?;
    let fid = perfect_conditional_fidelity(&gate).map_err(to_py_err)?;
    d.set_item("superposition", fid)?;
    Ok(d)
}

/// `(F_r_cs, F_r_ns_squared, discrepancy)` at one efficiency.
#[pyfunction]
fn cs_composition(eta: f64) -> PyResult<(f64, f64, f64)> {
    let check = cs_composition_check(eta).map_err(to_py_err)?;
    Ok((check.f_r_cs, check.f_r_ns_squared, check.discrepancy))
}

/// Fidelity report for the CS gate on the `|11>` input.
#[pyfunction]
fn cs_report<'py>(py: Python<'py>, eta: f64) -> PyResult<Bound<'py, PyDict>> {
    let gate = build_cs(&CsGateSpec::basis(1, 1).map_err(to_py_err)?).map_err(to_py_err)?;
    let report = fidelity_report(
        &gate.circuit,
        &gate.input,
        &gate.desired,
        &gate.correct_counts,
        eta,
    )
    .map_err(to_py_err)?;
    report_to_dict(py, &report)
}

/// The two reference extraction values under the strict PSD-remainder rule.
#[pyfunction]
fn pmax_demo() -> PyResult<(f64, f64)> {
    postfid::validate::pmax_demo_values().map_err(to_py_err)
}

/// Overlap fidelity of the perfect NS conditional with its target, for the
/// given real amplitudes.
#[pyfunction]
fn ns_conditional_fidelity(alpha: f64, beta: f64, gamma: f64) -> PyResult<f64> {
    let spec = NsGateSpec::from_reals(alpha, beta, gamma).map_err(to_py_err)?;
    let gate = build_ns(&spec).map_err(to_py_err)?;
    perfect_conditional_fidelity(&gate).map_err(to_py_err)
}

/// Runs the invariant suite; returns `(name, passed, detail)` triples.
#[pyfunction]
fn validate() -> Vec<(String, bool, String)> {
    postfid::validate::run_all()
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed, r.detail))
        .collect()
}

#[pymodule]
fn postfid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(ns_success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(ns_report, m)?)?;
    m.add_function(wrap_pyfunction!(ns_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(ns_conditional_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(cs_truth_table, m)?)?;
    m.add_function(wrap_pyfunction!(cs_composition, m)?)?;
    m.add_function(wrap_pyfunction!(cs_report, m)?)?;
    m.add_function(wrap_pyfunction!(pmax_demo, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
