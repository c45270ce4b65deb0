//! Python bindings. Coordinates are 1-based on this side, as in the
//! instance files and the printed assignments.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use map_memetic::bench::{run_single, ClockMode, Heuristic};
use map_memetic::instances::{generate, read_instance, write_instance};
use map_memetic::localsearch::{self, greedy_construct, CostMatrix, LocalSearchKind};
use map_memetic::memetic::{self, MemeticParams};
use map_memetic::{Family, InstanceId, MapError};

fn to_py(e: MapError) -> PyErr {
    match e {
        MapError::Io(msg) => PyIOError::new_err(msg),
        MapError::Integrity(msg) => PyRuntimeError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A problem instance.
#[pyclass(name = "Instance", module = "mapmemetic", frozen)]
struct PyInstance {
    inner: map_memetic::Instance,
}

#[pymethods]
impl PyInstance {
    /// Benchmark instance `(family, s, n, index)`, e.g. `("r", 3, 40, 1)`.
    #[staticmethod]
    fn generate(family: &str, s: usize, n: usize, index: usize) -> PyResult<Self> {
        let family = Family::from_code(family).map_err(to_py)?;
        let inner = generate(InstanceId::new(family, s, n, index)).map_err(to_py)?;
        Ok(PyInstance { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyInstance { inner: read_instance(text).map_err(to_py)? })
    }

    fn to_text(&self) -> String {
        write_instance(&self.inner)
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().code()
    }

    #[getter]
    fn seed(&self) -> i32 {
        self.inner.seed()
    }

    /// Id such as `3r40-1`, if the seed follows the benchmark rule.
    #[getter]
    fn id(&self) -> Option<String> {
        self.inner.id().map(|id| id.to_string())
    }

    /// Weight of one vector.
    fn vector_weight(&self, vector: Vec<usize>) -> PyResult<f64> {
        let zero = zero_based(&vector)?;
        self.inner.vector_weight(&zero).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Instance(family={:?}, s={}, n={}, seed={})", self.family(), self.s(), self.n(), self.seed())
    }
}

fn zero_based(v: &[usize]) -> PyResult<Vec<u32>> {
    v.iter()
        .map(|&c| {
            c.checked_sub(1)
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| PyValueError::new_err(format!("coordinate {c} is not a 1-based index")))
        })
        .collect()
}

/// A feasible assignment, stored canonically (vector `i` starts with `i`).
#[pyclass(name = "Assignment", module = "mapmemetic", frozen, eq, hash)]
#[derive(PartialEq, Eq, Hash)]
struct PyAssignment {
    inner: map_memetic::Assignment,
}

#[pymethods]
impl PyAssignment {
    #[new]
    fn new(vectors: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(PyAssignment { inner: map_memetic::Assignment::from_one_based(&vectors).map_err(to_py)? })
    }

    #[staticmethod]
    fn identity(s: usize, n: usize) -> Self {
        PyAssignment { inner: map_memetic::Assignment::identity(s, n) }
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn vectors(&self) -> Vec<Vec<usize>> {
        self.inner.to_one_based()
    }

    fn weight(&self, instance: &PyInstance) -> PyResult<f64> {
        instance.inner.assignment_weight(&self.inner).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Assignment({:?})", self.inner.to_one_based())
    }
}

fn wrap(inner: map_memetic::Assignment) -> PyAssignment {
    PyAssignment { inner }
}

fn check_shape(instance: &PyInstance, a: &PyAssignment) -> PyResult<()> {
    if a.inner.s() != instance.inner.s() || a.inner.n() != instance.inner.n() {
        return Err(PyValueError::new_err("assignment shape does not match the instance"));
    }
    Ok(())
}

/// Greedy construction.
#[pyfunction]
fn greedy(instance: &PyInstance) -> PyAssignment {
    wrap(greedy_construct(&instance.inner))
}

/// Runs a local search by code (`2opt`, `sDV`, `sDVv`, ...) from `start`.
#[pyfunction]
fn local_search(instance: &PyInstance, start: &PyAssignment, kind: &str) -> PyResult<PyAssignment> {
    check_shape(instance, start)?;
    let kind: LocalSearchKind = kind.parse().map_err(to_py)?;
    Ok(wrap(localsearch::local_search(&instance.inner, &start.inner, &kind).map_err(to_py)?))
}

/// Population size for budget `tau` and local-search time `t` (seconds).
#[pyfunction]
#[pyo3(signature = (tau, t, a = 0.08, b = 0.35, c = 0.85))]
fn m_opt(tau: f64, t: f64, a: f64, b: f64, c: f64) -> PyResult<usize> {
    let params = MemeticParams { a, b, c, ..MemeticParams::default() };
    memetic::m_opt(tau, t, &params).map_err(to_py)
}

/// Runs the memetic algorithm. With `tick`, time is virtual: every local
/// search costs `tick` seconds and the run is reproducible.
#[pyfunction]
#[pyo3(signature = (instance, tau, ls = None, seed = 1, tick = None))]
fn run_memetic<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    tau: f64,
    ls: Option<&str>,
    seed: i32,
    tick: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let ls = ls.map(|code| code.parse::<LocalSearchKind>()).transpose().map_err(to_py)?;
    let clock = match tick {
        Some(t) if t > 0.0 => ClockMode::Virtual(t),
        Some(t) => return Err(PyValueError::new_err(format!("tick must be positive, got {t}"))),
        None => ClockMode::Wall,
    };
    let inner = &instance.inner;
    let out = py
        .detach(|| run_single(inner, &Heuristic::Memetic(ls), tau, seed, clock))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("weight", out.weight)?;
    d.set_item("assignment", wrap(out.best))?;
    d.set_item("generations", out.generations)?;
    d.set_item("pop_size", out.pop_size)?;
    d.set_item("ls_time", out.ls_time)?;
    d.set_item("elapsed", out.elapsed)?;
    d.set_item("trajectory", out.trajectory)?;
    Ok(d)
}

/// Optimal 2-AP: returns (1-based column of each row, total cost).
#[pyfunction]
fn solve_ap(cost: Vec<Vec<f64>>) -> PyResult<(Vec<usize>, f64)> {
    let m = CostMatrix::from_rows(&cost).map_err(to_py)?;
    let (perm, total) = localsearch::solve_ap(&m);
    Ok((perm.into_iter().map(|j| j + 1).collect(), total))
}

/// Relative error in percent against a best-known weight.
#[pyfunction]
fn relative_error(weight: f64, best: f64) -> PyResult<f64> {
    map_memetic::relative_error(weight, best).map_err(to_py)
}

/// Position of `weight` within `[w_min, w_max]`, in percent.
#[pyfunction]
fn scaled_error(weight: f64, w_min: f64, w_max: f64) -> PyResult<f64> {
    map_memetic::scaled_error(weight, w_min, w_max).map_err(to_py)
}

#[pymodule]
pub fn mapmemetic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyAssignment>()?;
    m.add_function(wrap_pyfunction!(greedy, m)?)?;
    m.add_function(wrap_pyfunction!(local_search, m)?)?;
    m.add_function(wrap_pyfunction!(m_opt, m)?)?;
    m.add_function(wrap_pyfunction!(run_memetic, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ap, m)?)?;
    m.add_function(wrap_pyfunction!(relative_error, m)?)?;
    m.add_function(wrap_pyfunction!(scaled_error, m)?)?;
    m.add("LOCAL_SEARCHES", LocalSearchKind::CODES.to_vec())?;
    Ok(())
}
