//! Python bindings: case runs, sweeps, mesh validation and the linear
//! algebra kernels behind elimination.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fracfv::elimination::{schur_complement as schur, star_delta_transmissibilities};
use fracfv::harness::{self, CaseId, CaseSpec, HarnessError, RunOutput};
use fracfv::linsolve::{self, CsrMatrix};
use fracfv::mesh::import_conforming_mesh;
use fracfv::permeability::PermeabilityTensor as Tensor;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: HarnessError) -> PyErr {
    match e.exit_code() {
        64 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn csr(rows: &[Vec<f64>]) -> PyResult<CsrMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let mut entries = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != m {
            return Err(PyValueError::new_err("ragged matrix rows"));
        }
        entries.extend(r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (i, j, v)));
    }
    Ok(CsrMatrix::from_triplets(n, m, entries))
}

fn dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a.get(i, j)).collect()).collect()
}

/// Symmetric positive-definite permeability tensor.
#[pyclass(name = "PermeabilityTensor", module = "pyfracfv", frozen)]
struct PyTensor(Tensor);

#[pymethods]
impl PyTensor {
    #[staticmethod]
    fn isotropic(dim: usize, k: f64) -> Self {
        Self(Tensor::isotropic(dim, k))
    }

    #[staticmethod]
    fn diagonal(values: Vec<f64>) -> Self {
        Self(Tensor::diagonal(&values))
    }

    /// Principal values `k_max`, `k_min`, major axis at angle `theta` (radians).
    #[staticmethod]
    fn rotated_2d(k_max: f64, k_min: f64, theta: f64) -> Self {
        Self(Tensor::rotated_2d(k_max, k_min, theta))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        let m = self.0.matrix();
        (0..3).map(|i| (0..3).map(|j| m[(i, j)]).collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("PermeabilityTensor(dim={}, eigenvalues={:?})", self.0.dim(), self.0.eigenvalues())
    }
}

/// Result of a benchmark run.
#[pyclass(name = "RunResult", module = "pyfracfv", frozen)]
struct PyRun(RunOutput);

#[pymethods]
impl PyRun {
    #[getter]
    fn dofs(&self) -> usize {
        self.0.report.dofs
    }

    #[getter]
    fn solved_dofs(&self) -> usize {
        self.0.report.solved_dofs
    }

    #[getter]
    fn pressure(&self) -> Vec<f64> {
        self.0.flow.pressure.clone()
    }

    #[getter]
    fn tracer(&self) -> Option<Vec<f64>> {
        self.0.tracer.as_ref().map(|t| t.concentration.clone())
    }

    /// `(time, concentration)` at the probe cell.
    #[getter]
    fn series(&self) -> Vec<(f64, f64)> {
        self.0.tracer.as_ref().map(|t| t.series.clone()).unwrap_or_default()
    }

    /// Dof centres as `(x, y, z)`.
    fn centres(&self) -> Vec<(f64, f64, f64)> {
        (0..self.0.mesh.num_dofs())
            .map(|d| {
                let x = self.0.mesh.dof_centre(d);
                (x.x, x.y, x.z)
            })
            .collect()
    }

    /// L2 errors keyed by `(quantity, group)`.
    fn errors(&self) -> BTreeMap<(String, String), f64> {
        self.0
            .report
            .errors
            .iter()
            .map(|e| ((e.quantity.clone(), e.group.clone()), e.value))
            .collect()
    }

    #[getter]
    fn condition_ratio(&self) -> Option<f64> {
        self.0.report.condition.as_ref().map(|c| c.ratio)
    }

    fn report_json(&self) -> String {
        self.0.report.to_json()
    }

    /// Writes report, fields and series into `directory`.
    fn write(&self, directory: PathBuf) -> PyResult<()> {
        self.0.write(&directory).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("RunResult(case={}, dofs={})", self.0.report.spec.case, self.0.report.dofs)
    }
}

/// Runs a benchmark case; unset options take the case defaults.
#[pyfunction]
#[pyo3(signature = (case, resolution=None, disc=None, elim=None, overrides=None))]
fn run_case(
    case: &str,
    resolution: Option<usize>,
    disc: Option<&str>,
    elim: Option<&str>,
    overrides: Option<BTreeMap<String, f64>>,
) -> PyResult<PyRun> {
    let id: CaseId = case.parse().map_err(to_py)?;
    let mut spec = CaseSpec::new(id);
    if let Some(r) = resolution {
        spec = spec.with_resolution(r);
    }
    if let Some(d) = disc {
        spec = spec.with_discretization(d.parse().map_err(to_py)?);
    }
    if let Some(e) = elim {
        spec = spec.with_elimination(e.parse().map_err(to_py)?);
    }
    spec.overrides = overrides.unwrap_or_default();
    harness::run_case(&spec).map(PyRun).map_err(to_py)
}

/// Case 1.1 sweep; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (values=vec![1e-3, 1.0, 1e3], resolution=20))]
fn sweep_case_1_1(values: Vec<f64>, resolution: usize) -> PyResult<String> {
    harness::sweep_case_1_1(&values, resolution)
        .map(|s| s.to_json())
        .map_err(to_py)
}

/// Reads and checks a mesh document; returns a summary.
#[pyfunction]
fn validate_mesh<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let mesh = import_conforming_mesh(&path).map_err(runtime)?;
    mesh.validate().map_err(runtime)?;
    let out = PyDict::new(py);
    let dims: Vec<(usize, usize)> = mesh.subdomains.iter().map(|g| (g.dim, g.num_cells())).collect();
    out.set_item("subdomains", dims)?;
    out.set_item("interfaces", mesh.interfaces.len())?;
    out.set_item("dofs", mesh.num_dofs())?;
    Ok(out)
}

#[pyfunction]
fn direct_solve(a: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Vec<f64>> {
    linsolve::direct_solve(&csr(&a)?, &b).map_err(runtime)
}

/// 2-norm condition number.
#[pyfunction]
fn condition_number(a: Vec<Vec<f64>>) -> PyResult<f64> {
    linsolve::condition_number(&csr(&a)?).map_err(runtime)
}

/// Eliminates the listed unknowns; returns the reduced matrix and rhs.
#[pyfunction]
fn schur_complement(a: Vec<Vec<f64>>, b: Vec<f64>, eliminated: Vec<usize>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let r = schur(&csr(&a)?, &b, &eliminated).map_err(runtime)?;
    Ok((dense(&r.matrix), r.rhs.clone()))
}

/// Pairwise transmissibilities `(i, j, T_ij)` replacing a star of
/// half-transmissibilities `alpha`.
#[pyfunction]
fn star_delta(alpha: Vec<f64>) -> Vec<(usize, usize, f64)> {
    star_delta_transmissibilities(&alpha)
}

#[pymodule]
fn pyfracfv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("BUILD", harness::BUILD_DESCRIBE)?;
    m.add("NORM_VERSION", harness::NORM_VERSION)?;
    m.add("CASES", CaseId::ALL.iter().map(|c| c.as_str()).collect::<Vec<_>>())?;
    m.add_class::<PyTensor>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_case_1_1, m)?)?;
    m.add_function(wrap_pyfunction!(validate_mesh, m)?)?;
    m.add_function(wrap_pyfunction!(direct_solve, m)?)?;
    m.add_function(wrap_pyfunction!(condition_number, m)?)?;
    m.add_function(wrap_pyfunction!(schur_complement, m)?)?;
    m.add_function(wrap_pyfunction!(star_delta, m)?)?;
    Ok(())
}
