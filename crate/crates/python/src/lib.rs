//! Python bindings: problem specs, solving, interior evaluation and the
//! capacity oracle.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lemniscatic::cauchy::eval_analytic;
use lemniscatic::cli::{self, Computed, LoadedBundle, ProblemSpec};
use lemniscatic::{presets, BoundaryCurve, Discretization, Error, EvaluationRequest, LemniscaticDomain, NearBoundaryPolicy, C64};

fn py_err(e: Error) -> PyErr {
    match e.root() {
        Error::InvalidInput(_) | Error::Geometry(_) | Error::LengthMismatch { .. } | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn policy(name: &str) -> PyResult<NearBoundaryPolicy> {
    match name {
        "plain" => Ok(NearBoundaryPolicy::Plain),
        "normalized" => Ok(NearBoundaryPolicy::Normalized),
        "auto" => Ok(NearBoundaryPolicy::Auto),
        other => Err(PyValueError::new_err(format!(
            "policy must be 'plain', 'normalized' or 'auto', got {other:?}"
        ))),
    }
}

/// A problem: boundary curves, node count and solver settings.
#[pyclass(module = "lemniscatic_py", name = "Problem")]
struct PyProblem {
    spec: ProblemSpec,
}

fn problem(curves: lemniscatic::Result<Vec<BoundaryCurve>>, n: usize) -> PyResult<PyProblem> {
    Ok(PyProblem {
        spec: ProblemSpec::new(&curves.map_err(py_err)?, n),
    })
}

#[pymethods]
impl PyProblem {
    /// Parses the JSON problem format used by the command-line tool.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = ProblemSpec::from_json(text).map_err(py_err)?;
        spec.validate().map_err(py_err)?;
        Ok(Self { spec })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let spec = ProblemSpec::read(&path).map_err(py_err)?;
        spec.validate().map_err(py_err)?;
        Ok(Self { spec })
    }

    #[staticmethod]
    #[pyo3(signature = (center, radius, n = 64))]
    fn circle(center: C64, radius: f64, n: usize) -> PyResult<Self> {
        problem(BoundaryCurve::circle(center, radius).map(|c| vec![c]), n)
    }

    #[staticmethod]
    #[pyo3(signature = (center, semi_x, semi_y, n = 128))]
    fn ellipse(center: C64, semi_x: f64, semi_y: f64, n: usize) -> PyResult<Self> {
        problem(BoundaryCurve::ellipse(center, semi_x, semi_y).map(|c| vec![c]), n)
    }

    /// Closed polygons, one list of vertices per curve.
    #[staticmethod]
    #[pyo3(signature = (polygons, n = 512))]
    fn polygons(polygons: Vec<Vec<C64>>, n: usize) -> PyResult<Self> {
        problem(polygons.into_iter().map(BoundaryCurve::polygon).collect(), n)
    }

    /// Disks of radius `r` centered at ±1.
    #[staticmethod]
    #[pyo3(signature = (r, n = 64))]
    fn two_disks(r: f64, n: usize) -> PyResult<Self> {
        problem(presets::two_disks(r), n)
    }

    #[staticmethod]
    #[pyo3(signature = (n = 256))]
    fn seven_curves(n: usize) -> PyResult<Self> {
        problem(presets::seven_curves(), n)
    }

    #[staticmethod]
    #[pyo3(signature = (side, spacing = 2.0, n = 128))]
    fn circle_lattice(side: usize, spacing: f64, n: usize) -> PyResult<Self> {
        problem(presets::circle_lattice(side, spacing), n)
    }

    #[staticmethod]
    #[pyo3(signature = (n = 512))]
    fn four_squares(n: usize) -> PyResult<Self> {
        problem(presets::four_squares(), n)
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n
    }

    #[setter]
    fn set_n(&mut self, n: usize) {
        self.spec.n = n;
    }

    #[getter]
    fn ell(&self) -> usize {
        self.spec.curves.len()
    }

    #[getter]
    fn newton_tol(&self) -> f64 {
        self.spec.tolerances.newton_tol
    }

    #[setter]
    fn set_newton_tol(&mut self, v: f64) {
        self.spec.tolerances.newton_tol = v;
    }

    #[getter]
    fn max_newton(&self) -> usize {
        self.spec.tolerances.max_newton
    }

    #[setter]
    fn set_max_newton(&mut self, v: usize) {
        self.spec.tolerances.max_newton = v;
    }

    fn to_json(&self) -> PyResult<String> {
        cli::bundle::to_json(&self.spec).map_err(py_err)
    }

    /// Runs the full pipeline. Newton non-convergence is reported through
    /// `Solution.converged`, everything else raises.
    fn solve(&self, py: Python<'_>) -> PyResult<PySolution> {
        let spec = self.spec.clone();
        let computed = py.detach(|| cli::compute(&spec)).map_err(py_err)?;
        Ok(PySolution::from_computed(spec, computed))
    }

    /// Logarithmic capacity from an independent first-kind integral equation
    /// (smooth boundaries only).
    fn capacity(&self, py: Python<'_>) -> PyResult<f64> {
        let spec = self.spec.clone();
        py.detach(|| cli::run_capacity(&spec)).map(|r| r.capacity).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Problem(ell={}, n={})", self.spec.curves.len(), self.spec.n)
    }
}

/// Boundary values of `Φ`, the lemniscatic domain, and convergence data.
#[pyclass(module = "lemniscatic_py", name = "Solution", frozen)]
struct PySolution {
    spec: ProblemSpec,
    disc: Discretization,
    w: Vec<C64>,
    domain: LemniscaticDomain,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    failure: Option<String>,
    #[pyo3(get)]
    newton_iterations: usize,
    #[pyo3(get)]
    residual_norm: f64,
    #[pyo3(get)]
    lemniscate_residual: f64,
    #[pyo3(get)]
    lemniscate_residual_midpoint: f64,
    #[pyo3(get)]
    moment_residual: f64,
    /// Per component; empty for solutions read back from a bundle.
    #[pyo3(get)]
    gmres_iterations: Vec<usize>,
    computed: Option<Computed>,
}

impl PySolution {
    fn from_computed(spec: ProblemSpec, c: Computed) -> Self {
        let d = &c.map.diagnostics;
        Self {
            spec,
            disc: c.disc.clone(),
            w: c.map.boundary_w.clone(),
            domain: c.map.domain.clone(),
            converged: c.failure.is_none(),
            failure: c.failure.clone(),
            newton_iterations: d.newton_iterations,
            residual_norm: d.residual_norm,
            lemniscate_residual: d.lemniscate_residual,
            lemniscate_residual_midpoint: d.lemniscate_residual_midpoint,
            moment_residual: d.moment_residual,
            gmres_iterations: d.gmres.iterations.clone(),
            computed: Some(c),
        }
    }
}

#[pymethods]
impl PySolution {
    #[getter]
    fn centers(&self) -> Vec<C64> {
        self.domain.centers.clone()
    }

    #[getter]
    fn exponents(&self) -> Vec<f64> {
        self.domain.exponents.clone()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.domain.capacity
    }

    /// Boundary nodes η(t_i), all components concatenated.
    #[getter]
    fn nodes(&self) -> Vec<C64> {
        self.disc.eta.clone()
    }

    /// Φ at the boundary nodes.
    #[getter]
    fn boundary_values(&self) -> Vec<C64> {
        self.w.clone()
    }

    #[getter]
    fn component(&self) -> Vec<usize> {
        (0..self.disc.ell).flat_map(|j| std::iter::repeat_n(j, self.disc.n)).collect()
    }

    /// Φ at interior points; `None` where a point is not in the domain.
    #[pyo3(signature = (points, policy = "auto"))]
    fn evaluate(&self, py: Python<'_>, points: Vec<C64>, policy: &str) -> PyResult<Vec<Option<C64>>> {
        let req = EvaluationRequest {
            points,
            policy: self::policy(policy)?,
        };
        let f: Vec<C64> = self.w.iter().zip(&self.disc.eta).map(|(w, e)| w - e).collect();
        let values = py.detach(|| eval_analytic(&self.disc, &f, &req)).map_err(py_err)?;
        Ok(req.points.iter().zip(values).map(|(z, v)| v.ok().map(|f| z + f)).collect())
    }

    /// `Π_j |w − a_j|^{m_j}`.
    fn modulus(&self, w: C64) -> f64 {
        self.domain.modulus(w)
    }

    /// Writes the result bundle the command-line tool produces.
    fn write_bundle(&self, dir: PathBuf) -> PyResult<()> {
        match &self.computed {
            Some(c) => c.write(&self.spec, &dir).map_err(py_err),
            None => Err(PyValueError::new_err("solution was read from a bundle; it is already on disk")),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(ell={}, tau={:.12}, converged={})",
            self.disc.ell, self.domain.capacity, self.converged
        )
    }
}

/// Reads a bundle written by `Solution.write_bundle` or the command-line tool.
#[pyfunction]
fn load_bundle(dir: PathBuf) -> PyResult<PySolution> {
    let b = LoadedBundle::read(&dir).map_err(py_err)?;
    let disc = b.spec.discretize().map_err(py_err)?;
    let p = &b.params;
    Ok(PySolution {
        domain: b.domain(),
        converged: p.converged,
        failure: None,
        newton_iterations: p.newton_iterations,
        residual_norm: p.residual_norm,
        lemniscate_residual: p.lemniscate_residual,
        lemniscate_residual_midpoint: p.lemniscate_residual_midpoint,
        moment_residual: p.moment_residual,
        gmres_iterations: Vec::new(),
        disc,
        w: b.w,
        spec: b.spec,
        computed: None,
    })
}

/// Runs the built-in invariant checks; returns (all passed, report text).
#[pyfunction]
#[pyo3(signature = (n = 64))]
fn selftest(py: Python<'_>, n: usize) -> (bool, String) {
    let report = py.detach(|| cli::run_selftest(n));
    (report.ok(), report.text())
}

#[pymodule]
pub fn lemniscatic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(load_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
