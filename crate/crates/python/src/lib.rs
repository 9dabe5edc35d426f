//! Python bindings for the witnessforge core.
//!
//! Matrices cross the boundary as lists of rows of Python `complex`; reports
//! come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use witnessforge::cv::{self, FockTruncation, DEFAULT_TAIL_TOL};
use witnessforge::finite;
use witnessforge::linalg::{BipartiteDensity, ComplexMatrix};
use witnessforge::report;
use witnessforge::tomography::{self, HomodyneSampler};
use witnessforge::witness;

fn py_err(e: witnessforge::Error) -> PyErr {
    if e.is_precondition() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    ComplexMatrix::new(n_rows, n_cols, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn truncation(x: f64, n_max: Option<usize>, tol: f64) -> PyResult<FockTruncation> {
    match n_max {
        Some(n) => FockTruncation::with_n_max(x, n, tol),
        None => FockTruncation::for_twb(x, tol),
    }
    .map_err(py_err)
}

/// Depolarized state R = p|Ψ⟩⟩⟨⟨Ψ| + (1−p)𝟙/d².
#[pyclass(name = "DepolarizedFamily", frozen)]
struct PyDepolarizedFamily {
    inner: finite::DepolarizedFamily,
}

#[pymethods]
impl PyDepolarizedFamily {
    #[new]
    fn new(psi: Vec<Vec<Complex64>>, p: f64) -> PyResult<Self> {
        let inner = finite::DepolarizedFamily::new(matrix_from_rows(psi)?, p).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn maximally_entangled(d: usize, p: f64) -> PyResult<Self> {
        let inner =
            finite::DepolarizedFamily::new(finite::maximally_entangled(d), p).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn schmidt(coefficients: Vec<f64>, d: usize, p: f64) -> PyResult<Self> {
        let psi = finite::schmidt_operator(&coefficients, d).map_err(py_err)?;
        let inner = finite::DepolarizedFamily::new(psi, p).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p()
    }

    #[getter]
    fn sigma(&self) -> Vec<f64> {
        self.inner.svd().sigma.clone()
    }

    fn with_p(&self, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_p(p).map_err(py_err)?,
        })
    }

    fn analytic_min_eig(&self) -> f64 {
        self.inner.analytic_min_eig()
    }

    fn detection_threshold(&self) -> PyResult<f64> {
        self.inner.detection_threshold().map_err(py_err)
    }

    fn density(&self) -> PyResult<PyDensity> {
        Ok(PyDensity {
            inner: self.inner.density().map_err(py_err)?,
        })
    }

    fn witness(&self) -> PyResult<PyWitness> {
        Ok(PyWitness {
            inner: self.inner.witness().map_err(py_err)?,
        })
    }

    /// Witness value, classification, threshold and local quorum as a dict.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &report::witness_report(&self.inner).map_err(py_err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "DepolarizedFamily(d={}, p={})",
            self.inner.d(),
            self.inner.p()
        )
    }
}

#[pyclass(name = "BipartiteDensity", frozen)]
struct PyDensity {
    inner: BipartiteDensity,
}

#[pymethods]
impl PyDensity {
    #[getter]
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_a(), self.inner.dim_b())
    }

    #[getter]
    fn truncation_deficit(&self) -> f64 {
        self.inner.truncation_deficit()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        matrix_to_rows(self.inner.matrix())
    }

    /// Smallest eigenvalue of the partial transpose on B.
    fn min_pt_eigenvalue(&self) -> PyResult<f64> {
        let pt = self
            .inner
            .partial_transpose(witnessforge::linalg::Subsystem::B);
        Ok(witnessforge::linalg::hermitian_eig(&pt)
            .map_err(py_err)?
            .values[0])
    }
}

#[pyclass(name = "WitnessOperator", frozen)]
struct PyWitness {
    inner: witness::WitnessOperator,
}

#[pymethods]
impl PyWitness {
    #[getter]
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_a, self.inner.dim_b)
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        matrix_to_rows(&self.inner.matrix)
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn rank(&self, tol: f64) -> PyResult<usize> {
        self.inner.rank(tol).map_err(py_err)
    }

    fn evaluate(&self, rho: &PyDensity) -> PyResult<f64> {
        witness::evaluate_witness(&self.inner, &rho.inner).map_err(py_err)
    }
}

#[pyfunction]
#[pyo3(signature = (x, n_max = None, tol = DEFAULT_TAIL_TOL))]
fn twb_state(x: f64, n_max: Option<usize>, tol: f64) -> PyResult<PyDensity> {
    let inner = cv::twb_state(x, &truncation(x, n_max, tol)?).map_err(py_err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
#[pyo3(signature = (x, gamma_t, n_max = None, tol = DEFAULT_TAIL_TOL))]
fn phase_noisy_twb(x: f64, gamma_t: f64, n_max: Option<usize>, tol: f64) -> PyResult<PyDensity> {
    let inner = cv::phase_noisy_twb(x, gamma_t, &truncation(x, n_max, tol)?).map_err(py_err)?;
    Ok(PyDensity { inner })
}

#[pyfunction]
#[pyo3(signature = (x, kappa, n_max = None, tol = DEFAULT_TAIL_TOL))]
fn gauss_noisy_twb(x: f64, kappa: f64, n_max: Option<usize>, tol: f64) -> PyResult<PyDensity> {
    let inner = cv::gauss_noisy_twb(x, kappa, &truncation(x, n_max, tol)?).map_err(py_err)?;
    Ok(PyDensity { inner })
}

/// Twin-beam witness on the same cutoff as `rho`.
#[pyfunction]
fn cv_witness_value(rho: &PyDensity) -> PyResult<f64> {
    let n_max = rho.inner.dim_a() - 1;
    let trunc = FockTruncation {
        n_max,
        tail_bound: 0.0,
        tolerance: 1.0,
    };
    witness::evaluate_witness(&cv::cv_witness(&trunc).map_err(py_err)?, &rho.inner).map_err(py_err)
}

#[pyfunction]
fn expect_witness_phase(x: f64, gamma_t: f64) -> PyResult<f64> {
    cv::expect_witness_phase(x, gamma_t).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, kappa, n_max = None, tol = DEFAULT_TAIL_TOL))]
fn expect_witness_gauss(x: f64, kappa: f64, n_max: Option<usize>, tol: f64) -> PyResult<f64> {
    cv::expect_witness_gauss(x, kappa, &truncation(x, n_max, tol)?).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, tol = DEFAULT_TAIL_TOL))]
fn gauss_threshold<'py>(py: Python<'py>, x: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(
        py,
        &cv::gauss_separability_threshold(x, tol).map_err(py_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (x, kappa, n_max = None, tol = DEFAULT_TAIL_TOL))]
fn bs_squeezing<'py>(
    py: Python<'py>,
    x: f64,
    kappa: f64,
    n_max: Option<usize>,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(
        py,
        &cv::bs_squeezing(x, kappa, &truncation(x, n_max, tol)?).map_err(py_err)?,
    )
}

#[pyfunction]
fn kernel_w(x1: f64, phi1: f64, x2: f64, phi2: f64) -> f64 {
    tomography::kernel_w(x1, phi1, x2, phi2)
}

#[pyclass(name = "HomodyneBatch", frozen)]
struct PyBatch {
    inner: tomography::HomodyneBatch,
}

#[pymethods]
impl PyBatch {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn state_descriptor(&self) -> String {
        self.inner.state_descriptor.clone()
    }

    /// Samples as (phi1, x1, phi2, x2) tuples.
    fn samples(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner
            .samples
            .iter()
            .map(|s| (s.phi1, s.x1, s.phi2, s.x2))
            .collect()
    }

    /// Monte Carlo estimate of the witness: (mean, std_error).
    fn estimate(&self) -> PyResult<(f64, f64)> {
        let est = tomography::mc_estimate_witness(&self.inner).map_err(py_err)?;
        Ok((est.mean, est.std_error))
    }

    fn write_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path)?;
        self.inner.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    }
}

#[pyfunction]
#[pyo3(signature = (rho, n, seed, workers = 1, descriptor = "python"))]
fn sample_homodyne(
    py: Python<'_>,
    rho: &PyDensity,
    n: usize,
    seed: u64,
    workers: usize,
    descriptor: &str,
) -> PyResult<PyBatch> {
    let sampler = HomodyneSampler::new(&rho.inner, descriptor).map_err(py_err)?;
    let inner = py
        .detach(|| sampler.sample(n, seed, workers))
        .map_err(py_err)?;
    Ok(PyBatch { inner })
}

#[pymodule]
fn witnessforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDepolarizedFamily>()?;
    m.add_class::<PyDensity>()?;
    m.add_class::<PyWitness>()?;
    m.add_class::<PyBatch>()?;
    m.add_function(wrap_pyfunction!(twb_state, m)?)?;
    m.add_function(wrap_pyfunction!(phase_noisy_twb, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_noisy_twb, m)?)?;
    m.add_function(wrap_pyfunction!(cv_witness_value, m)?)?;
    m.add_function(wrap_pyfunction!(expect_witness_phase, m)?)?;
    m.add_function(wrap_pyfunction!(expect_witness_gauss, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(bs_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_w, m)?)?;
    m.add_function(wrap_pyfunction!(sample_homodyne, m)?)?;
    Ok(())
}
