//! Python bindings: geometry queries, energy audits of decompositions and
//! l^p circulant preconditioners.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde_json::Value;

use lportho_core::bench::{run_bench as core_run_bench, BenchConfig};
use lportho_core::geometry::{self, GeometryResult, DEFAULT_ORTHO_TOL};
use lportho_core::io::DecompositionFile;
use lportho_core::signal::{self as sig, Domain, FifOptions};
use lportho_core::toeplitz::{self as tp, PTildeMode, PcgOptions, DEFAULT_EPSILON, DEFAULT_TOL};
use lportho_core::{
    CirculantMatrix, Decomposition, DiscreteFunction, ModelSymbol, PExponent, Signal, ToeplitzOperator,
};

fn err(e: lportho_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

fn pair(f: Vec<f64>, g: Vec<f64>, p: f64) -> PyResult<(DiscreteFunction, DiscreteFunction, PExponent)> {
    Ok((
        DiscreteFunction::new(f).map_err(err)?,
        DiscreteFunction::new(g).map_err(err)?,
        PExponent::new(p).map_err(err)?,
    ))
}

#[pyfunction]
fn weak_inner_product(f: Vec<f64>, g: Vec<f64>, p: f64) -> PyResult<f64> {
    let (f, g, p) = pair(f, g, p)?;
    geometry::weak_inner_product(&f, &g, p).map_err(err)
}

#[pyfunction]
fn pythagorean_defect(f: Vec<f64>, g: Vec<f64>, p: f64) -> PyResult<f64> {
    let (f, g, p) = pair(f, g, p)?;
    geometry::pythagorean_defect(&f, &g, p).map_err(err)
}

#[pyfunction]
fn angle(f: Vec<f64>, g: Vec<f64>, p: f64) -> PyResult<f64> {
    let (f, g, p) = pair(f, g, p)?;
    geometry::angle(&f, &g, p).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (f, g, p, tol = DEFAULT_ORTHO_TOL))]
fn is_orthogonal(f: Vec<f64>, g: Vec<f64>, p: f64, tol: f64) -> PyResult<bool> {
    let (f, g, p) = pair(f, g, p)?;
    geometry::is_orthogonal(&f, &g, p, tol).map_err(err)
}

/// Dict with `wip`, `defect`, `cot_angle`, `angle` and `orthogonal`.
#[pyfunction]
#[pyo3(signature = (f, g, p, tol = DEFAULT_ORTHO_TOL))]
fn geometry_report<'py>(py: Python<'py>, f: Vec<f64>, g: Vec<f64>, p: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let (f, g, p) = pair(f, g, p)?;
    let r = GeometryResult::compute(&f, &g, p).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("wip", r.weak_inner_product)?;
    d.set_item("defect", r.defect)?;
    d.set_item("cot_angle", r.cot_angle)?;
    d.set_item("angle", r.angle)?;
    d.set_item("orthogonal", r.is_orthogonal(tol))?;
    Ok(d)
}

#[pyfunction]
fn l1_fourier_energy(samples: Vec<f64>) -> PyResult<f64> {
    Ok(sig::l1_fourier_energy(&Signal::new(samples).map_err(err)?))
}

/// Unnormalized DFT of a real signal.
#[pyfunction]
fn dft(samples: Vec<f64>) -> PyResult<Vec<Complex64>> {
    Ok(sig::dft(&Signal::new(samples).map_err(err)?).coefficients().to_vec())
}

#[pyclass(name = "Decomposition", frozen)]
struct PyDecomposition(Decomposition);

#[pymethods]
impl PyDecomposition {
    /// Components plus trend; `signal`, when given, must equal their sum.
    #[new]
    #[pyo3(signature = (components, trend, signal = None))]
    fn new(components: Vec<Vec<f64>>, trend: Vec<f64>, signal: Option<Vec<f64>>) -> PyResult<Self> {
        let file = DecompositionFile {
            components,
            trend,
            signal,
            bandwidth: None,
            meta: None,
        };
        Ok(Self(file.into_decomposition().map_err(err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = DecompositionFile::from_json(text).map_err(err)?;
        Ok(Self(file.into_decomposition().map_err(err)?))
    }

    fn to_json(&self) -> String {
        DecompositionFile::from_decomposition(&self.0).to_json()
    }

    #[getter]
    fn components(&self) -> Vec<Vec<f64>> {
        self.0.components().iter().map(|c| c.samples().to_vec()).collect()
    }

    #[getter]
    fn trend(&self) -> Vec<f64> {
        self.0.trend().samples().to_vec()
    }

    #[getter]
    fn source(&self) -> Vec<f64> {
        self.0.source().samples().to_vec()
    }

    #[pyo3(signature = (tol = 1e-10))]
    fn energy_report<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &sig::check_energy_conservation(&self.0, tol).map_err(err)?)
    }

    #[pyo3(signature = (domain = "time"))]
    fn pairwise_l1_angles(&self, domain: &str) -> PyResult<Vec<Vec<f64>>> {
        let domain: Domain = domain.parse().map_err(err)?;
        sig::pairwise_l1_angles(&self.0, domain).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.components().len()
    }
}

#[pyfunction]
#[pyo3(signature = (samples, halfwidths, delta = 1e-3, max_inner = 200))]
fn fif_decompose(samples: Vec<f64>, halfwidths: Vec<usize>, delta: f64, max_inner: usize) -> PyResult<PyDecomposition> {
    let s = Signal::new(samples).map_err(err)?;
    let opts = FifOptions {
        halfwidths,
        delta,
        max_inner,
    };
    Ok(PyDecomposition(sig::fif_decompose(&s, &opts).map_err(err)?))
}

#[pyclass(name = "ModelSymbol", frozen)]
struct PyModelSymbol(ModelSymbol);

#[pymethods]
impl PyModelSymbol {
    #[new]
    fn new(alpha: f64, beta: f64, gamma: f64) -> PyResult<Self> {
        Ok(Self(ModelSymbol::new(alpha, beta, gamma).map_err(err)?))
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi()
    }

    #[getter]
    fn psi(&self) -> f64 {
        self.0.psi()
    }

    fn eval(&self, theta: f64) -> f64 {
        self.0.eval(theta)
    }

    fn range(&self) -> (f64, f64) {
        self.0.range()
    }

    fn toeplitz(&self, n: usize) -> PyResult<PyToeplitz> {
        Ok(PyToeplitz(tp::build_toeplitz(&self.0.into(), n).map_err(err)?))
    }
}

#[pyclass(name = "ToeplitzOperator", frozen)]
struct PyToeplitz(ToeplitzOperator);

#[pymethods]
impl PyToeplitz {
    #[staticmethod]
    fn model(alpha: f64, beta: f64, gamma: f64, n: usize) -> PyResult<Self> {
        PyModelSymbol::new(alpha, beta, gamma)?.toeplitz(n)
    }

    /// `2n - 1` values for the offsets `-(n-1) ..= n-1`.
    #[staticmethod]
    fn from_diagonals(diagonals: Vec<f64>) -> PyResult<Self> {
        Ok(Self(ToeplitzOperator::from_diagonals(diagonals).map_err(err)?))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn coefficient(&self, k: i64) -> f64 {
        self.0.coefficient(k)
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.matvec(&x).map_err(err)
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.0.to_dense();
        d.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

#[pyclass(name = "CirculantMatrix", frozen)]
struct PyCirculant(CirculantMatrix);

#[pymethods]
impl PyCirculant {
    #[new]
    fn new(first_column: Vec<f64>) -> PyResult<Self> {
        Ok(Self(CirculantMatrix::new(first_column).map_err(err)?))
    }

    /// Circulant closest to `t` in the entrywise l^p norm.
    #[staticmethod]
    fn lp_minimizer(t: PyRef<'_, PyToeplitz>, p: f64) -> PyResult<Self> {
        Ok(Self(tp::lp_circulant_minimizer(&t.0, p).map_err(err)?))
    }

    #[staticmethod]
    fn frobenius(t: PyRef<'_, PyToeplitz>) -> PyResult<Self> {
        Ok(Self(tp::frobenius_circulant(&t.0).map_err(err)?))
    }

    #[getter]
    fn first_column(&self) -> Vec<f64> {
        self.0.first_column().to_vec()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<Complex64> {
        self.0.eigenvalues().to_vec()
    }

    #[getter]
    fn p(&self) -> Option<f64> {
        self.0.p()
    }

    fn is_singular(&self) -> bool {
        self.0.is_singular()
    }

    fn is_positive_definite(&self) -> bool {
        self.0.is_positive_definite()
    }

    fn singularity_threshold(&self) -> f64 {
        self.0.singularity_threshold()
    }

    /// Positive definite version with nonpositive eigenvalues replaced.
    #[pyo3(signature = (threshold = None))]
    fn corrected(&self, threshold: Option<f64>) -> PyResult<Self> {
        let thr = threshold.unwrap_or_else(|| self.0.singularity_threshold());
        Ok(Self(tp::strang_type_correction(&self.0, thr).map_err(err)?))
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.matvec(&x).map_err(err)
    }

    fn solve(&self, r: Vec<f64>) -> PyResult<Vec<f64>> {
        tp::circulant_solve(&self.0, &r).map_err(err)
    }
}

/// Dict with `iterations`, `relative_residuals`, `status`, `p_used` and `solution`.
#[pyfunction]
#[pyo3(signature = (t, b, m = None, tol = DEFAULT_TOL, maxit = None))]
fn pcg_solve<'py>(
    py: Python<'py>,
    t: PyRef<'_, PyToeplitz>,
    b: Vec<f64>,
    m: Option<PyRef<'_, PyCirculant>>,
    tol: f64,
    maxit: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let report = tp::pcg_solve(&t.0, &b, m.as_ref().map(|m| &m.0), &PcgOptions { tol, maxit }).map_err(err)?;
    let d = to_py(py, &report)?;
    d.set_item("solution", report.solution)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (t, grid, epsilon = DEFAULT_EPSILON, mode = "spectral"))]
fn select_p_tilde(t: PyRef<'_, PyToeplitz>, grid: Vec<f64>, epsilon: f64, mode: &str) -> PyResult<f64> {
    let mode = match mode {
        "spectral" => PTildeMode::Spectral,
        "exact" => PTildeMode::Exact,
        other => {
            return Err(PyValueError::new_err(format!(
                "mode must be 'spectral' or 'exact', got '{other}'"
            )))
        }
    };
    tp::select_p_tilde(&t.0, &grid, epsilon, mode).map_err(err)
}

/// Eigenvalues of `C^-1/2 T C^-1/2` and their clustering around 1.
#[pyfunction]
fn preconditioned_spectrum<'py>(
    py: Python<'py>,
    t: PyRef<'_, PyToeplitz>,
    c: PyRef<'_, PyCirculant>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &tp::preconditioned_spectrum_diagnostic(&t.0, &c.0).map_err(err)?)
}

/// Runs an iteration-count benchmark from a JSON config; returns the cells
/// plus `csv` and `markdown` renderings.
#[pyfunction]
#[pyo3(signature = (config_json, workers = 0))]
fn run_bench<'py>(py: Python<'py>, config_json: &str, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    let cfg = BenchConfig::from_json(config_json).map_err(err)?;
    let res = py.detach(|| core_run_bench(&cfg, workers)).map_err(err)?;
    let d = to_py(py, &res)?;
    d.set_item("csv", res.to_csv())?;
    d.set_item("markdown", res.to_markdown())?;
    Ok(d)
}

#[pymodule]
fn lportho(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(weak_inner_product, m)?)?;
    m.add_function(wrap_pyfunction!(pythagorean_defect, m)?)?;
    m.add_function(wrap_pyfunction!(angle, m)?)?;
    m.add_function(wrap_pyfunction!(is_orthogonal, m)?)?;
    m.add_function(wrap_pyfunction!(geometry_report, m)?)?;
    m.add_function(wrap_pyfunction!(l1_fourier_energy, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(fif_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(pcg_solve, m)?)?;
    m.add_function(wrap_pyfunction!(select_p_tilde, m)?)?;
    m.add_function(wrap_pyfunction!(preconditioned_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_bench, m)?)?;
    m.add_class::<PyDecomposition>()?;
    m.add_class::<PyModelSymbol>()?;
    m.add_class::<PyToeplitz>()?;
    m.add_class::<PyCirculant>()?;
    Ok(())
}
