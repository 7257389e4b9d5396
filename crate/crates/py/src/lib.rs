//! Python bindings. Reports and descriptors cross the boundary as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use uhs_core::copies::{self, SetDescriptor};
use uhs_core::structures::{load_prefix, save_prefix_string, Rel};
use uhs_core::types_orbits;
use uhs_core::verify::{self, suite, Report};
use uhs_core::UhStructure;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn descriptor(text: &str) -> PyResult<SetDescriptor> {
    SetDescriptor::named(text).map_or_else(|| serde_json::from_str(text).map_err(value_err), Ok)
}

/// A materialized prefix of one of the structures.
#[pyclass(name = "Structure", frozen)]
struct PyStructure(UhStructure);

impl PyStructure {
    fn check_code(&self, code: usize) -> PyResult<()> {
        self.0.check_decided(code).map_err(value_err)
    }
}

#[pymethods]
impl PyStructure {
    #[new]
    fn new(spec: &str, size: usize) -> PyResult<Self> {
        let spec = spec.parse().map_err(value_err)?;
        UhStructure::build(spec, size).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        load_prefix(text.as_bytes()).map(Self).map_err(value_err)
    }

    fn save(&self) -> PyResult<String> {
        save_prefix_string(&self.0, self.0.len()).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Structure('{}', {})", self.0.spec(), self.0.len())
    }

    fn label(&self, code: usize) -> PyResult<String> {
        self.check_code(code)?;
        Ok(self.0.label(code).to_string())
    }

    /// One of "<", ">", "=" or "|".
    fn relation(&self, a: usize, b: usize) -> PyResult<&'static str> {
        self.check_code(a)?;
        self.check_code(b)?;
        Ok(match self.0.relation(a, b) {
            Rel::Lt => "<",
            Rel::Gt => ">",
            Rel::Eq => "=",
            Rel::Inc => "|",
        })
    }

    fn orbit_member(&self, base: Vec<usize>, x: usize, y: usize) -> PyResult<bool> {
        types_orbits::orbit_member(&self.0, &base, x, y).map_err(value_err)
    }

    /// `set` is a named set ("evens", "integers", ...) or descriptor JSON.
    #[pyo3(signature = (set, f_max=2, x_bound=200, search_bound=None))]
    fn check_copy(&self, set: &str, f_max: usize, x_bound: usize, search_bound: Option<usize>) -> PyResult<String> {
        let a = descriptor(set)?;
        let v = copies::check_copy(&self.0, &a, f_max, x_bound, search_bound.unwrap_or(self.0.len()))
            .map_err(value_err)?;
        serde_json::to_string(&v).map_err(value_err)
    }
}

/// Runs acceptance criterion `n` and returns the report JSON.
#[pyfunction]
#[pyo3(signature = (n, timing=false))]
fn run_suite(py: Python<'_>, n: u32, timing: bool) -> PyResult<String> {
    let r = py.detach(|| suite::run(n, timing)).map_err(value_err)?;
    Ok(r.to_json())
}

/// Re-checks every witness in a report and returns the replay report JSON.
#[pyfunction]
fn replay(py: Python<'_>, report: &str) -> PyResult<String> {
    let r: Report = serde_json::from_str(report).map_err(value_err)?;
    Ok(py.detach(|| verify::replay(&r)).to_json())
}

/// 0 pass, 1 fail, 2 unknown at bound.
#[pyfunction]
fn exit_code(report: &str) -> PyResult<i32> {
    let r: Report = serde_json::from_str(report).map_err(value_err)?;
    Ok(r.exit_code())
}

#[pymodule]
pub fn uhs_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(exit_code, m)?)?;
    Ok(())
}
