//! Python bindings for the isogeometric Stokes library: spline spaces,
//! assembled Stokes problems, preconditioned MINRES solves and whole
//! experiment cells.

use iga_stokes::discretization::{inf_sup_constant, Family, Transform};
use iga_stokes::experiment::{self, ExperimentConfig, GeometryKind, StopSpec};
use iga_stokes::solvers::{PreconditionerConfig, StoppingRule, VelocityStrategy};
use iga_stokes::splines::{mass_1d, stiffness_1d, BandedMatrix, SplineSpace1D};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: iga_stokes::Error) -> PyErr {
    match e {
        iga_stokes::Error::Parameter(_)
        | iga_stokes::Error::Config(_)
        | iga_stokes::Error::Domain(_)
        | iga_stokes::Error::Shape { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = iga_stokes::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// Univariate B-spline space with uniform open knot vector on [0, 1].
#[pyclass(name = "SplineSpace", frozen)]
struct PySplineSpace {
    inner: SplineSpace1D,
}

#[pymethods]
impl PySplineSpace {
    #[new]
    fn new(degree: usize, smoothness: i32, num_elements: usize) -> PyResult<Self> {
        Ok(PySplineSpace { inner: SplineSpace1D::new(degree, smoothness, num_elements).map_err(to_py)? })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn knots(&self) -> Vec<f64> {
        self.inner.knots().to_vec()
    }

    fn greville(&self) -> Vec<f64> {
        self.inner.greville()
    }

    /// Index of the first nonzero basis function at `x` and the values of
    /// the `deriv`-th derivatives of all nonzero functions there.
    #[pyo3(signature = (x, deriv = 0))]
    fn eval_basis(&self, x: f64, deriv: usize) -> PyResult<(usize, Vec<f64>)> {
        self.inner.eval_basis(x, deriv).map_err(to_py)
    }

    /// Dense mass matrix as a list of rows.
    fn mass(&self) -> Vec<Vec<f64>> {
        rows(&mass_1d(&self.inner))
    }

    /// Dense stiffness matrix as a list of rows.
    fn stiffness(&self) -> Vec<Vec<f64>> {
        rows(&stiffness_1d(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "SplineSpace(degree={}, smoothness={}, num_elements={})",
            self.inner.degree(),
            self.inner.smoothness(),
            self.inner.num_elements()
        )
    }
}

fn rows(m: &BandedMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m.get(i, j)).collect()).collect()
}

/// Assembled Stokes problem with the manufactured solution, Dirichlet data
/// eliminated.
#[pyclass(name = "StokesProblem", frozen)]
struct PyStokesProblem {
    inner: experiment::StokesProblem,
}

#[pymethods]
impl PyStokesProblem {
    #[new]
    #[pyo3(signature = (family = "TH", degree = 2, level = 3, geometry = "square", transform = "direct"))]
    fn new(family: &str, degree: usize, level: usize, geometry: &str, transform: &str) -> PyResult<Self> {
        let inner = experiment::StokesProblem::new(
            parse::<GeometryKind>(geometry)?,
            parse::<Family>(family)?,
            parse::<Transform>(transform)?,
            degree,
            level,
        )
        .map_err(to_py)?;
        Ok(PyStokesProblem { inner })
    }

    #[getter]
    fn dofs(&self) -> usize {
        self.inner.dofs()
    }

    #[getter]
    fn num_velocity(&self) -> usize {
        self.inner.system.num_velocity()
    }

    #[getter]
    fn num_pressure(&self) -> usize {
        self.inner.system.num_pressure()
    }

    /// Dimension of the pressure kernel (1 for stable pairs).
    #[getter]
    fn kernel_dim(&self) -> usize {
        self.inner.pressure_kernel.len()
    }

    fn rhs(&self) -> Vec<f64> {
        self.inner.system.rhs()
    }

    /// `A x` for the stacked unknown vector `x = (u, p)`.
    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.dofs() {
            return Err(PyValueError::new_err(format!("expected {} entries, got {}", self.inner.dofs(), x.len())));
        }
        let mut y = vec![0.0; x.len()];
        self.inner.system.apply(&x, &mut y);
        Ok(y)
    }

    /// Solution by sparse LU with the pressure kernel removed.
    fn direct_solve(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        py.detach(|| self.inner.reference_solution()).map_err(to_py)
    }

    /// L² errors of velocity and pressure against the exact solution.
    fn errors(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        if x.len() != self.inner.dofs() {
            return Err(PyValueError::new_err(format!("expected {} entries, got {}", self.inner.dofs(), x.len())));
        }
        self.inner.errors(&x).map_err(to_py)
    }

    /// Discrete inf-sup constant (dense eigensolve, small systems only).
    fn inf_sup(&self) -> PyResult<f64> {
        let proven = self.inner.spaces.stability_proven();
        Ok(inf_sup_constant(&self.inner.system, proven).map_err(to_py)?.constant)
    }

    /// Preconditioned MINRES from zero. Stops on the preconditioned
    /// residual reduction `tol`; returns a dict with the solution, the
    /// iteration count, convergence flag, residual history and errors.
    #[pyo3(signature = (precond = "scms_mg", tol = 1e-8, max_iters = 1000, beta = None, damping_scale = None))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        precond: &str,
        tol: f64,
        max_iters: usize,
        beta: Option<f64>,
        damping_scale: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let strategy = parse::<VelocityStrategy>(precond)?;
        let mut config = PreconditionerConfig::defaults(strategy, self.inner.spaces.family, self.inner.spaces.transform);
        if let Some(b) = beta {
            config.beta = b;
        }
        if let Some(d) = damping_scale {
            config.damping_scale = d;
        }
        config.validate().map_err(to_py)?;
        let (x, report) = py
            .detach(|| self.inner.solve(&config, StoppingRule::ResidualReduction { tol }, max_iters))
            .map_err(to_py)?;
        let (ev, ep) = self.inner.errors(&x).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("solution", x)?;
        d.set_item("iterations", report.iterations)?;
        d.set_item("converged", report.converged)?;
        d.set_item("residual_history", report.residual_history)?;
        d.set_item("err_v", ev)?;
        d.set_item("err_p", ep)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.spaces;
        format!("StokesProblem(family={}, degree={}, level={}, dofs={})", s.family, s.degree, s.level, self.inner.dofs())
    }
}

/// Runs one table cell (error-based stopping against a reference solution)
/// and returns its row as a dict.
#[pyfunction]
#[pyo3(signature = (family = "TH", degree = 2, level = 4, geometry = "square", transform = "direct",
                    precond = "scms_mg", tol = 1e-6, max_iters = 1000))]
#[allow(clippy::too_many_arguments)]
fn run_cell<'py>(
    py: Python<'py>,
    family: &str,
    degree: usize,
    level: usize,
    geometry: &str,
    transform: &str,
    precond: &str,
    tol: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let family = parse::<Family>(family)?;
    let config = ExperimentConfig {
        geometry: parse(geometry)?,
        families: vec![family],
        transform: parse(transform)?,
        degrees: vec![degree],
        levels: vec![level],
        precond: parse(precond)?,
        stop: StopSpec::Error(tol),
        max_iters,
        ..ExperimentConfig::default()
    };
    config.validate().map_err(to_py)?;
    let r = py.detach(|| experiment::run_cell(&config, family, degree, level)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("family", r.family.short_name())?;
    d.set_item("degree", r.p)?;
    d.set_item("level", r.level)?;
    d.set_item("precond", r.precond.name())?;
    d.set_item("dofs", r.dofs)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged())?;
    d.set_item("err_v", r.err_v)?;
    d.set_item("err_p", r.err_p)?;
    d.set_item("seconds", r.seconds)?;
    Ok(d)
}

#[pymodule]
fn iga_stokes_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySplineSpace>()?;
    m.add_class::<PyStokesProblem>()?;
    m.add_function(wrap_pyfunction!(run_cell, m)?)?;
    Ok(())
}
