//! Python bindings. Build with the `extension-module` feature and import
//! as `ic_alloc`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use ic_core::baselines::{lex_partition, random_partition, thin, ThinningSpec};
use ic_core::counting::{phi_min, pi_lower_bound};
use ic_core::design::{self, IcDesign};
use ic_core::harness::{monte_carlo_delta, simulate_rounds};
use ic_core::{io, metrics, oracle, verify, DTuple};

create_exception!(ic_alloc, IcAllocError, PyException);

fn err(e: ic_core::Error) -> PyErr {
    IcAllocError::new_err(e.to_string())
}

/// Serializes through JSON into plain Python dicts and lists.
fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| IcAllocError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn tuples(edges: Vec<Vec<u32>>, n: u32) -> PyResult<Vec<DTuple>> {
    edges
        .into_iter()
        .map(|e| DTuple::new(e, n).map_err(err))
        .collect()
}

fn plain(groups: &[Vec<DTuple>]) -> Vec<Vec<Vec<u32>>> {
    groups
        .iter()
        .map(|g| g.iter().map(|t| t.elements().to_vec()).collect())
        .collect()
}

/// Constants of the construction for one `(n, d, N)`.
#[pyclass(name = "IcParameters", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams(design::IcParameters);

#[pymethods]
impl PyParams {
    #[new]
    fn new(n: u32, d: u32, workers: u64) -> PyResult<Self> {
        design::derive_parameters(n, d, workers).map(PyParams).map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.d
    }

    #[getter]
    fn workers(&self) -> u64 {
        self.0.workers
    }

    #[getter]
    fn k(&self) -> u32 {
        self.0.k
    }

    #[getter]
    fn case(&self) -> &'static str {
        self.0.case.as_str()
    }

    #[getter]
    fn s(&self) -> u32 {
        self.0.s
    }

    #[getter]
    fn g(&self) -> u32 {
        self.0.g
    }

    #[getter]
    fn base_groups(&self) -> u64 {
        self.0.base_groups
    }

    fn pi_bound(&self) -> u64 {
        self.0.pi_bound()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "IcParameters(n={}, d={}, N={}, k={}, case={}, s={}, g={})",
            p.n,
            p.d,
            p.workers,
            p.k,
            p.case.as_str(),
            p.s,
            p.g
        )
    }
}

/// A set of d-subsets of `[n]`.
#[pyclass(name = "TaskSet", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTaskSet(ic_core::TaskSet);

#[pymethods]
impl PyTaskSet {
    #[new]
    fn new(n: u32, d: u32, edges: Vec<Vec<u32>>) -> PyResult<Self> {
        ic_core::TaskSet::new(n, d, tuples(edges, n)?)
            .map(PyTaskSet)
            .map_err(err)
    }

    #[staticmethod]
    fn full(n: u32, d: u32) -> PyResult<Self> {
        ic_core::TaskSet::full(n, d).map(PyTaskSet).map_err(err)
    }

    /// Keeps each d-subset independently with probability `phi`.
    #[staticmethod]
    fn thin(n: u32, d: u32, phi: f64, seed: u64) -> PyResult<Self> {
        thin(n, d, &ThinningSpec::new(phi, seed)).map(PyTaskSet).map_err(err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        io::parse_tasks(text).map(PyTaskSet).map_err(err)
    }

    fn to_text(&self) -> String {
        io::emit_tasks(&self.0)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n()
    }

    #[getter]
    fn d(&self) -> u32 {
        self.0.d()
    }

    #[getter]
    fn edges(&self) -> Vec<Vec<u32>> {
        self.0.edges().iter().map(|t| t.elements().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Tasks split into `N` groups with the files each worker holds.
#[pyclass(name = "Partition", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPartition(design::FinalPartition);

#[pymethods]
impl PyPartition {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        io::parse_partition(text).map(PyPartition).map_err(err)
    }

    /// Groups given as lists of tuples; each worker holds its own footprint.
    #[staticmethod]
    fn from_groups(n: u32, d: u32, groups: Vec<Vec<Vec<u32>>>) -> PyResult<Self> {
        let groups = groups
            .into_iter()
            .map(|g| tuples(g, n))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyPartition(design::FinalPartition::from_groups(n, d, groups, Default::default())))
    }

    fn to_json(&self) -> String {
        io::emit_partition(&self.0)
    }

    #[getter]
    fn groups(&self) -> Vec<Vec<Vec<u32>>> {
        plain(&self.0.groups)
    }

    #[getter]
    fn placement(&self) -> Vec<Vec<u32>> {
        self.0.placement.clone()
    }

    fn pi(&self) -> u64 {
        metrics::pi_of(&self.0)
    }

    fn delta(&self) -> f64 {
        metrics::delta_of(&self.0, self.0.num_groups() as u64)
    }

    fn arf(&self) -> f64 {
        metrics::arf_of(&self.0, self.0.n)
    }

    /// Every metric and applicable bound, as a dict.
    #[pyo3(signature = (phi = 1.0))]
    fn report<'py>(&self, py: Python<'py>, phi: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &metrics::full_report(&self.0, None, phi))
    }

    fn verify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &verify::verify_partition(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.num_groups()
    }
}

/// The construction over all of `A_{n,d}`, materialized.
#[pyclass(name = "BasePartition", frozen)]
struct PyBase(design::BasePartition);

#[pymethods]
impl PyBase {
    #[new]
    fn new(n: u32, d: u32, workers: u64) -> PyResult<Self> {
        let params = design::derive_parameters(n, d, workers).map_err(err)?;
        design::build_base_partition(&params).map(PyBase).map_err(err)
    }

    #[getter]
    fn params(&self) -> PyParams {
        PyParams(*self.0.params())
    }

    /// Tuples of group `b` (1-based).
    fn group(&self, b: usize) -> PyResult<Vec<Vec<u32>>> {
        if b == 0 || b > self.0.num_groups() {
            return Err(err(ic_core::Error::IndexOutOfRange {
                index: b as u64,
                max: self.0.num_groups() as u64,
            }));
        }
        Ok(self.0.group_tuples(b).into_iter().map(DTuple::into_vec).collect())
    }

    #[getter]
    fn footprints(&self) -> Vec<Vec<u32>> {
        self.0.footprints().to_vec()
    }

    fn pi(&self) -> u64 {
        self.0.pi()
    }

    fn refine(&self, tasks: &PyTaskSet) -> PyResult<PyPartition> {
        design::refine(&self.0, &tasks.0).map(PyPartition).map_err(err)
    }

    fn to_partition(&self) -> PyPartition {
        PyPartition(self.0.to_final())
    }

    fn __len__(&self) -> usize {
        self.0.num_groups()
    }
}

/// Closed-form group lookup without materializing anything.
#[pyclass(name = "Design", frozen)]
struct PyDesign(IcDesign);

#[pymethods]
impl PyDesign {
    #[new]
    fn new(n: u32, d: u32, workers: u64) -> PyResult<Self> {
        let params = design::derive_parameters(n, d, workers).map_err(err)?;
        IcDesign::new(params).map(PyDesign).map_err(err)
    }

    /// 1-based group of the tuple.
    fn assign(&self, t: Vec<u32>) -> PyResult<u64> {
        let t = DTuple::new(t, self.0.params().n).map_err(err)?;
        self.0.assign(&t).map_err(err)
    }

    fn nominal_placement(&self, group: u64) -> PyResult<Vec<u32>> {
        let workers = self.0.params().workers;
        if group == 0 || group > workers {
            return Err(err(ic_core::Error::IndexOutOfRange { index: group, max: workers }));
        }
        Ok(self.0.nominal_placement(group))
    }

    fn refine(&self, tasks: &PyTaskSet) -> PyResult<PyPartition> {
        design::refine_streaming(&self.0, &tasks.0).map(PyPartition).map_err(err)
    }
}

#[pyfunction(name = "lex_partition")]
fn py_lex_partition(tasks: &PyTaskSet, workers: u64) -> PyResult<PyPartition> {
    lex_partition(&tasks.0, workers).map(PyPartition).map_err(err)
}

#[pyfunction(name = "random_partition")]
fn py_random_partition(tasks: &PyTaskSet, workers: u64, seed: u64) -> PyResult<PyPartition> {
    random_partition(&tasks.0, workers, seed).map(PyPartition).map_err(err)
}

/// `(pi_star, witness_groups)`.
#[pyfunction(name = "brute_force_pi_star")]
#[pyo3(signature = (tasks, workers, edge_cap = oracle::DEFAULT_EDGE_CAP))]
fn py_brute_force(tasks: &PyTaskSet, workers: u64, edge_cap: usize) -> PyResult<(u64, Vec<Vec<Vec<u32>>>)> {
    let res = oracle::brute_force_pi_star(&tasks.0, workers, edge_cap).map_err(err)?;
    Ok((res.pi_star, plain(&res.witness)))
}

/// `(value, vacuous)`.
#[pyfunction(name = "phi_min")]
fn py_phi_min(n: u32, d: u32, workers: u64) -> PyResult<(f64, bool)> {
    phi_min(n, d, workers).map(|p| (p.value, p.vacuous)).map_err(err)
}

/// `(value, ceiling)`.
#[pyfunction(name = "pi_lower_bound")]
fn py_pi_lower_bound(n: u32, d: u32, workers: u64, phi: f64) -> PyResult<(f64, u64)> {
    pi_lower_bound(n, d, workers, phi)
        .map(|b| (b.value, b.integer))
        .map_err(err)
}

#[pyfunction(name = "monte_carlo_delta")]
fn py_monte_carlo<'py>(
    py: Python<'py>,
    n: u32,
    d: u32,
    workers: u64,
    phi: f64,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let summary = py
        .detach(|| monte_carlo_delta(n, d, workers, phi, trials, seed))
        .map_err(err)?;
    to_py(py, &summary)
}

/// One round per `(phi, seed)` pair.
#[pyfunction(name = "simulate_rounds")]
fn py_simulate<'py>(
    py: Python<'py>,
    n: u32,
    d: u32,
    workers: u64,
    rounds: Vec<(f64, u64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let specs: Vec<ThinningSpec> = rounds.into_iter().map(|(phi, seed)| ThinningSpec::new(phi, seed)).collect();
    let sim = py.detach(|| simulate_rounds(n, d, workers, &specs)).map_err(err)?;
    to_py(py, &sim)
}

#[pymodule]
fn ic_alloc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IcAllocError", m.py().get_type::<IcAllocError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyTaskSet>()?;
    m.add_class::<PyPartition>()?;
    m.add_class::<PyBase>()?;
    m.add_class::<PyDesign>()?;
    m.add_function(wrap_pyfunction!(py_lex_partition, m)?)?;
    m.add_function(wrap_pyfunction!(py_random_partition, m)?)?;
    m.add_function(wrap_pyfunction!(py_brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(py_phi_min, m)?)?;
    m.add_function(wrap_pyfunction!(py_pi_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(py_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(py_simulate, m)?)?;
    Ok(())
}
