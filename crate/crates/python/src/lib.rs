//! Python bindings: domains, fields, constants and the verification routines.
//!
//! Structured options (samplers, walk parameters, boundary data) are plain
//! dicts with the same keys as the JSON scenario files; reports come back as
//! dicts.

use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyValueError};
use pyo3::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use epiholder::constants;
use epiholder::extension::{self, Polyline, WeightedLengthOptions};
use epiholder::field::{gradient, StepPolicy};
use epiholder::geometry::{GraphShape, LipschitzGraph};
use epiholder::harmonic::{wos_evaluate, WosParams};
use epiholder::hoelder;
use epiholder::scenario::DataSpec;
use epiholder::{EpigraphDomain, Error, HarmonicField, Point, ScalarField};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Unsupported(m) => PyNotImplementedError::new_err(m),
        Error::Accuracy(m) => PyArithmeticError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn point(x: Vec<f64>) -> PyResult<Point> {
    Point::new(x).map_err(to_py)
}

/// Python object -> serde type, through the stdlib json module.
fn from_py<T: DeserializeOwned + Default>(py: Python<'_>, obj: Option<&Bound<'_, PyAny>>) -> PyResult<T> {
    let Some(obj) = obj else { return Ok(T::default()) };
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// serde type -> Python object (dicts, lists, floats).
fn to_obj<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Domain", module = "pyepiholder", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDomain {
    inner: EpigraphDomain,
}

#[pymethods]
impl PyDomain {
    /// The half-space `x_N > 0` in `R^dim`.
    #[staticmethod]
    fn half_space(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: EpigraphDomain::half_space(dim).map_err(to_py)? })
    }

    #[staticmethod]
    fn affine(slope: Vec<f64>, offset: f64, lip: f64) -> PyResult<Self> {
        let g = LipschitzGraph::affine(slope, offset, lip).map_err(to_py)?;
        Ok(Self { inner: EpigraphDomain::new(g) })
    }

    /// `psi(x') = slope |x' - apex| + height`.
    #[staticmethod]
    #[pyo3(signature = (slope, apex, lip, height = 0.0))]
    fn abs_cone(slope: f64, apex: Vec<f64>, lip: f64, height: f64) -> PyResult<Self> {
        let g = LipschitzGraph::new(GraphShape::AbsCone { slope, apex, height }, lip).map_err(to_py)?;
        Ok(Self { inner: EpigraphDomain::new(g) })
    }

    #[staticmethod]
    fn piecewise_linear(knots: Vec<[f64; 2]>, lip: f64) -> PyResult<Self> {
        let g = LipschitzGraph::piecewise_linear(knots, lip).map_err(to_py)?;
        Ok(Self { inner: EpigraphDomain::new(g) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lip(&self) -> f64 {
        self.inner.lip()
    }

    fn psi(&self, xp: Vec<f64>) -> PyResult<f64> {
        self.inner.graph.psi(&xp).map_err(to_py)
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        self.inner.contains(&x)
    }

    fn vertical_gap(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.vertical_gap(&x).map_err(to_py)
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.distance(&x).map_err(to_py)?.value)
    }

    fn distance_lower_bound(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.distance_lower_bound(&x).map_err(to_py)
    }

    fn shifted_distance_bound(&self, x: Vec<f64>, lam: f64) -> PyResult<f64> {
        self.inner.shifted_distance_bound(&x, lam).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Domain({:?}, lip={})", self.inner.graph.shape, self.inner.lip())
    }
}

#[pyclass(name = "Field", module = "pyepiholder", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: HarmonicField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn constant(dim: usize, value: f64) -> PyResult<Self> {
        Ok(Self { inner: HarmonicField::constant(dim, value).map_err(to_py)? })
    }

    /// `exp(-x_N) cos(x_1)`.
    #[staticmethod]
    fn separable_exp(dim: usize) -> PyResult<Self> {
        Ok(Self { inner: HarmonicField::separable_exp(dim).map_err(to_py)? })
    }

    /// Pole field for a pole strictly below the graph of `domain`.
    #[staticmethod]
    fn pole(domain: &PyDomain, pole: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: HarmonicField::pole(&domain.inner, point(pole)?).map_err(to_py)? })
    }

    /// `1 - theta / pi` on the upper half-plane.
    #[staticmethod]
    fn harmonic_measure() -> Self {
        Self { inner: HarmonicField::harmonic_measure_2d() }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind_name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&x).map_err(to_py)
    }

    fn gradient(&self, domain: &PyDomain, x: Vec<f64>) -> PyResult<Vec<f64>> {
        gradient(&self.inner, &domain.inner, &x, StepPolicy::default()).map_err(to_py)
    }

    fn sup_bound(&self) -> Option<f64> {
        self.inner.sup_bound()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { inner: self.inner.clone().scaled(factor) }
    }

    fn shifted(&self, lam: f64) -> PyResult<Self> {
        Ok(Self { inner: epiholder::harmonic::shifted_field(&self.inner, lam).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("Field({})", self.inner.kind_name())
    }
}

#[pyfunction]
fn ball_volume(n: u32) -> f64 {
    constants::ball_volume(n)
}

#[pyfunction]
fn schwarz_constant(n: u32) -> PyResult<f64> {
    constants::schwarz_constant(n).map_err(to_py)
}

#[pyfunction]
fn gamma_star(k: f64) -> PyResult<f64> {
    constants::gamma_star(k).map_err(to_py)
}

#[pyfunction]
fn derive_constants<'py>(py: Python<'py>, dim: u32, alpha: f64, lip: f64, c: f64) -> PyResult<Bound<'py, PyAny>> {
    to_obj(py, &constants::derive_constants(dim, alpha, lip, c).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (field, domain, alpha, sampler = None))]
fn vertical_seminorm<'py>(
    py: Python<'py>,
    field: &PyField,
    domain: &PyDomain,
    alpha: f64,
    sampler: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s: hoelder::VerticalSampler = from_py(py, sampler)?;
    to_obj(py, &hoelder::vertical_seminorm(&field.inner, &domain.inner, alpha, &s).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (field, domain, alpha, sampler = None))]
fn global_seminorm<'py>(
    py: Python<'py>,
    field: &PyField,
    domain: &PyDomain,
    alpha: f64,
    sampler: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s: hoelder::PairSampler = from_py(py, sampler)?;
    to_obj(py, &hoelder::global_seminorm(&field.inner, &domain.inner, alpha, &s).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (field, domain, alpha, sampler = None))]
fn local_seminorm<'py>(
    py: Python<'py>,
    field: &PyField,
    domain: &PyDomain,
    alpha: f64,
    sampler: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s: hoelder::PairSampler = from_py(py, sampler)?;
    to_obj(py, &hoelder::local_seminorm(&field.inner, &domain.inner, alpha, &s).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (field, domain, alpha, samplers = None, tol = 1e-9, inflation = 1.2))]
fn theorem_check<'py>(
    py: Python<'py>,
    field: &PyField,
    domain: &PyDomain,
    alpha: f64,
    samplers: Option<&Bound<'py, PyAny>>,
    tol: f64,
    inflation: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let s: hoelder::TheoremSamplers = from_py(py, samplers)?;
    let field = field.inner.clone();
    let domain = domain.inner.clone();
    let report = py
        .detach(move || hoelder::theorem_check(&field, &domain, alpha, &s, tol, inflation))
        .map_err(to_py)?;
    to_obj(py, &report)
}

/// Walk-on-spheres estimate of the harmonic extension of `data` (a dict such
/// as `{"kind": "indicator", "threshold": 0.0}`).
#[pyfunction]
#[pyo3(signature = (domain, data, x, params = None))]
fn wos<'py>(
    py: Python<'py>,
    domain: &PyDomain,
    data: &Bound<'py, PyAny>,
    x: Vec<f64>,
    params: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (data,))?.extract()?;
    let spec: DataSpec = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let data = match spec {
        DataSpec::Constant { value } => epiholder::harmonic::BoundaryData::Constant(value),
        DataSpec::Indicator { threshold } => epiholder::harmonic::BoundaryData::Indicator { threshold },
        DataSpec::PowerKink { alpha } => epiholder::harmonic::BoundaryData::power_kink(alpha).map_err(to_py)?,
    };
    let p: WosParams = from_py(py, params)?;
    let domain = domain.inner.clone();
    let est = py.detach(move || wos_evaluate(&domain, &data, &x, &p)).map_err(to_py)?;
    to_obj(py, &est)
}

#[pyfunction]
fn cigar_curve<'py>(py: Python<'py>, domain: &PyDomain, x: Vec<f64>, y: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_obj(py, &extension::cigar_curve(&domain.inner, &point(x)?, &point(y)?).map_err(to_py)?)
}

#[pyfunction]
fn weighted_length<'py>(
    py: Python<'py>,
    domain: &PyDomain,
    vertices: Vec<Vec<f64>>,
    alpha: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let pts = vertices.into_iter().map(point).collect::<PyResult<Vec<_>>>()?;
    let curve = Polyline::new(pts).map_err(to_py)?;
    let r = extension::weighted_length(&curve, &domain.inner, alpha, &WeightedLengthOptions::default()).map_err(to_py)?;
    to_obj(py, &r)
}

#[pyfunction]
#[pyo3(signature = (domain, alpha, sampler = None))]
fn gehring_martio_check<'py>(
    py: Python<'py>,
    domain: &PyDomain,
    alpha: f64,
    sampler: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let s: extension::GehringMartioSampler = from_py(py, sampler)?;
    let domain = domain.inner.clone();
    let r = py
        .detach(move || extension::gehring_martio_check(&domain, alpha, &s, &WeightedLengthOptions::default()))
        .map_err(to_py)?;
    to_obj(py, &r)
}

#[pymodule]
fn pyepiholder(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomain>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(ball_volume, m)?)?;
    m.add_function(wrap_pyfunction!(schwarz_constant, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_star, m)?)?;
    m.add_function(wrap_pyfunction!(derive_constants, m)?)?;
    m.add_function(wrap_pyfunction!(vertical_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(global_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(local_seminorm, m)?)?;
    m.add_function(wrap_pyfunction!(theorem_check, m)?)?;
    m.add_function(wrap_pyfunction!(wos, m)?)?;
    m.add_function(wrap_pyfunction!(cigar_curve, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_length, m)?)?;
    m.add_function(wrap_pyfunction!(gehring_martio_check, m)?)?;
    Ok(())
}
