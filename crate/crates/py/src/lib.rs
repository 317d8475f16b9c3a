//! Python bindings: feature maps, embeddings, the regularized witness
//! solve, transport diagnostics, and the 1-D oracles.
//!
//! Vectors cross the boundary as lists of floats, matrices as lists of
//! rows, so plain Python lists and numpy arrays (via `.tolist()`) both
//! work.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use rksd::embeddings::SampleSet;
use rksd::oracle1d::GridDensity;

fn py_err(e: rksd::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mat_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("empty matrix"));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn rows_from_mat(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn samples_from_rows(rows: Vec<Vec<f64>>, label: &str) -> PyResult<SampleSet> {
    SampleSet::from_rows(&rows, label).map_err(py_err)
}

fn grid_density(
    grid: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> PyResult<GridDensity> {
    match (a, b) {
        (Some(a), Some(b)) => GridDensity::new(grid, p, q, a, b).map_err(py_err),
        (None, None) => GridDensity::with_auto_bounds(grid, p, q).map_err(py_err),
        _ => Err(PyValueError::new_err("pass both a and b, or neither")),
    }
}

/// Gaussian-enveloped random Fourier feature map.
#[pyclass(name = "FeatureMap", frozen)]
struct PyFeatureMap {
    inner: rksd::FeatureMap,
}

#[pymethods]
impl PyFeatureMap {
    #[new]
    fn new(d: usize, m: usize, bandwidth: f64, window_scale: f64, seed: u64) -> PyResult<Self> {
        Ok(PyFeatureMap {
            inner: rksd::FeatureMap::new(d, m, bandwidth, window_scale, seed).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim_input(&self) -> usize {
        self.inner.dim_input()
    }

    #[getter]
    fn dim_feature(&self) -> usize {
        self.inner.dim_feature()
    }

    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude()
    }

    /// Φ(x) as a list of m floats.
    fn evaluate(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let phi = self.inner.evaluate(&x).map_err(py_err)?;
        Ok(phi.iter().copied().collect())
    }

    /// JΦ(x) as d rows of m entries.
    fn jacobian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let jac = self.inner.jacobian(&x).map_err(py_err)?;
        Ok(rows_from_mat(&jac))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyFeatureMap {
            inner: rksd::FeatureMap::from_json(text).map_err(py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureMap(d={}, m={}, bandwidth={}, window_scale={}, seed={})",
            self.inner.dim_input(),
            self.inner.dim_feature(),
            self.inner.bandwidth(),
            self.inner.window_scale(),
            self.inner.seed()
        )
    }
}

/// Closed-form solution of the regularized witness problem.
#[pyclass(name = "WitnessSolution", frozen)]
struct PyWitnessSolution {
    inner: rksd::WitnessSolution,
}

#[pymethods]
impl PyWitnessSolution {
    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs.iter().copied().collect()
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn kinetic(&self) -> f64 {
        self.inner.kinetic
    }

    #[getter]
    fn penalty(&self) -> f64 {
        self.inner.penalty
    }

    /// The normalized witness u / value; raises for a zero value.
    fn witness_function(&self) -> PyResult<Vec<f64>> {
        let f = self.inner.witness_function().map_err(py_err)?;
        Ok(f.iter().copied().collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "WitnessSolution(lambda={}, value={}, kinetic={}, penalty={})",
            self.inner.lambda, self.inner.value, self.inner.kinetic, self.inner.penalty
        )
    }
}

/// Empirical mean embedding (1/N) Σ Φ(x_i).
#[pyfunction]
fn mean_embedding(fm: &PyFeatureMap, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let samples = samples_from_rows(points, "samples")?;
    let mu = rksd::mean_embedding(&fm.inner, &samples).map_err(py_err)?;
    Ok(mu.iter().copied().collect())
}

/// Empirical derivative gramian (1/M) Σ JΦ(y_j)ᵀ JΦ(y_j), as m rows.
#[pyfunction]
fn derivative_gramian(fm: &PyFeatureMap, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let samples = samples_from_rows(points, "samples")?;
    let gram = rksd::derivative_gramian(&fm.inner, &samples).map_err(py_err)?;
    Ok(rows_from_mat(&gram))
}

/// Solves (D + λI)u = δ.
#[pyfunction]
fn solve_witness(
    gramian: Vec<Vec<f64>>,
    delta: Vec<f64>,
    lambda: f64,
) -> PyResult<PyWitnessSolution> {
    let gram = mat_from_rows(gramian)?;
    let delta = DVector::from_vec(delta);
    Ok(PyWitnessSolution {
        inner: rksd::solve_witness(&gram, &delta, lambda).map_err(py_err)?,
    })
}

/// √(δᵀ(D + λI)⁻¹δ).
#[pyfunction]
fn discrepancy_value(gramian: Vec<Vec<f64>>, delta: Vec<f64>, lambda: f64) -> PyResult<f64> {
    let gram = mat_from_rows(gramian)?;
    rksd::discrepancy_value(&gram, &DVector::from_vec(delta), lambda).map_err(py_err)
}

/// The variational objective 2⟨u, δ⟩ − uᵀ(D + λI)u.
#[pyfunction]
fn objective(
    gramian: Vec<Vec<f64>>,
    delta: Vec<f64>,
    u: Vec<f64>,
    lambda: f64,
) -> PyResult<f64> {
    let gram = mat_from_rows(gramian)?;
    rksd::objective(
        &gram,
        &DVector::from_vec(delta),
        &DVector::from_vec(u),
        lambda,
    )
    .map_err(py_err)
}

/// End-to-end convenience: embeddings of both sample sets, then the solve.
#[pyfunction]
fn sample_discrepancy(
    fm: &PyFeatureMap,
    p: Vec<Vec<f64>>,
    q: Vec<Vec<f64>>,
    lambda: f64,
) -> PyResult<PyWitnessSolution> {
    let p = samples_from_rows(p, "p")?;
    let q = samples_from_rows(q, "q")?;
    let delta = rksd::mean_difference(
        &rksd::mean_embedding(&fm.inner, &p).map_err(py_err)?,
        &rksd::mean_embedding(&fm.inner, &q).map_err(py_err)?,
    )
    .map_err(py_err)?;
    let gram = rksd::derivative_gramian(&fm.inner, &q).map_err(py_err)?;
    Ok(PyWitnessSolution {
        inner: rksd::solve_witness(&gram, &delta, lambda).map_err(py_err)?,
    })
}

/// Witness value ⟨coeffs, Φ(x)⟩.
#[pyfunction]
fn evaluate_witness(fm: &PyFeatureMap, coeffs: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    rksd::evaluate_witness(&fm.inner, &DVector::from_vec(coeffs), &x).map_err(py_err)
}

/// Transport velocity JΦ(x)·coeffs.
#[pyfunction]
fn velocity_field(fm: &PyFeatureMap, coeffs: Vec<f64>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let v = rksd::velocity_field(&fm.inner, &DVector::from_vec(coeffs), &x).map_err(py_err)?;
    Ok(v.iter().copied().collect())
}

/// Eigendecomposition of a gramian: (eigenvalues descending, eigenvectors)
/// with eigenvectors[j] the j-th eigenvector.
#[pyfunction]
fn spectral_decomposition(gramian: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let gram = mat_from_rows(gramian)?;
    let s = rksd::spectral_decomposition(&gram).map_err(py_err)?;
    let eigenvalues: Vec<f64> = s.eigenvalues().iter().copied().collect();
    let eigenvectors: Vec<Vec<f64>> = (0..s.len())
        .map(|j| s.eigenvectors().column(j).iter().copied().collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// Velocity via the spectral route Σ_j ⟨ψ_j, δ⟩/(λ_j + λ)·JΦ(x)ψ_j.
#[pyfunction]
fn filtered_velocity(
    fm: &PyFeatureMap,
    gramian: Vec<Vec<f64>>,
    delta: Vec<f64>,
    lambda: f64,
    x: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let gram = mat_from_rows(gramian)?;
    let s = rksd::spectral_decomposition(&gram).map_err(py_err)?;
    let v = rksd::filtered_velocity(&fm.inner, &s, &DVector::from_vec(delta), lambda, &x)
        .map_err(py_err)?;
    Ok(v.iter().copied().collect())
}

/// Exact 1-D discrepancy from tabulated densities.
#[pyfunction]
#[pyo3(signature = (grid, p, q, a=None, b=None))]
fn sobolev_1d(
    grid: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> PyResult<f64> {
    rksd::sobolev_1d(&grid_density(grid, p, q, a, b)?).map_err(py_err)
}

/// Exact 1-D Wasserstein-2 via quantile functions.
#[pyfunction]
#[pyo3(signature = (grid, p, q, a=None, b=None))]
fn wasserstein2_1d(
    grid: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> PyResult<f64> {
    rksd::wasserstein2_1d(&grid_density(grid, p, q, a, b)?).map_err(py_err)
}

/// Both oracles plus the sandwich flags: (s, w2, lower_ok, upper_ok).
#[pyfunction]
#[pyo3(signature = (grid, p, q, a=None, b=None))]
fn check_bounds(
    grid: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> PyResult<(f64, f64, bool, bool)> {
    let bc = rksd::check_bounds(&grid_density(grid, p, q, a, b)?).map_err(py_err)?;
    Ok((bc.s, bc.w2, bc.lower_ok, bc.upper_ok))
}

/// Max-norm residual of the advection identity for a candidate u.
#[pyfunction]
#[pyo3(signature = (grid, p, q, u, a=None, b=None))]
fn pde_residual(
    grid: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    u: Vec<f64>,
    a: Option<f64>,
    b: Option<f64>,
) -> PyResult<f64> {
    rksd::pde_residual(&grid_density(grid, p, q, a, b)?, &u).map_err(py_err)
}

#[pymodule]
fn rksd_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFeatureMap>()?;
    m.add_class::<PyWitnessSolution>()?;
    m.add_function(wrap_pyfunction!(mean_embedding, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_gramian, m)?)?;
    m.add_function(wrap_pyfunction!(solve_witness, m)?)?;
    m.add_function(wrap_pyfunction!(discrepancy_value, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(sample_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_witness, m)?)?;
    m.add_function(wrap_pyfunction!(velocity_field, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(filtered_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(sobolev_1d, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein2_1d, m)?)?;
    m.add_function(wrap_pyfunction!(check_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(pde_residual, m)?)?;
    Ok(())
}
