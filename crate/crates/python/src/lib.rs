//! Python bindings for the cliquegan core: graphs, detection, metrics and the
//! planted-graph generator.

use std::collections::HashMap;

use cliquegan::agm;
use cliquegan::eval;
use cliquegan::synth::{self, PlantedSpec};
use cliquegan::{CommunityAssignment, CoverSource, Error, TrainConfig};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn cover(communities: Vec<Vec<usize>>, source: CoverSource) -> CommunityAssignment {
    CommunityAssignment::new(communities, source)
}

/// Undirected simple graph on vertices `0..n` (or on the labels of a loaded
/// edge list, compacted to `0..n`).
#[pyclass(name = "Graph", module = "cliquegan_py", frozen)]
struct PyGraph {
    inner: cliquegan::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let inner = cliquegan::Graph::from_edges(n, &edges).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    /// Reads a whitespace-separated edge list.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = cliquegan::graph::load_edge_list(path).map_err(to_py)?;
        Ok(PyGraph { inner })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// Original vertex labels, indexed by compact id.
    #[getter]
    fn labels(&self) -> Vec<u64> {
        self.inner.labels().to_vec()
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.inner.vertex_count() && v < self.inner.vertex_count() && self.inner.has_edge(u, v)
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().collect()
    }

    /// Number of `m`-cliques.
    fn count_cliques(&self, m: usize) -> PyResult<usize> {
        Ok(cliquegan::CliqueIndex::enumerate(&self.inner, m).map_err(to_py)?.len())
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={})",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

/// Result of `detect`.
#[pyclass(name = "Detection", module = "cliquegan_py", frozen, get_all)]
struct PyDetection {
    /// Communities as sorted lists of compact vertex ids.
    communities: Vec<Vec<usize>>,
    theta_g: Vec<Vec<f64>>,
    theta_d: Vec<Vec<f64>>,
    community_count: usize,
    delta: f64,
    iterations: usize,
    history: Vec<f64>,
    pretrain_history: Vec<f64>,
}

fn rows(m: &cliquegan::AffiliationMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|v| m.row(v).to_vec()).collect()
}

/// Trains on `graph` and thresholds the result into communities. Keyword
/// arguments are training settings by name (`clique_size=3`,
/// `communities=200` or `"auto"`, `max_iters=5`, `seed=1`, ...).
#[pyfunction]
#[pyo3(signature = (graph, **settings))]
fn detect(py: Python<'_>, graph: &PyGraph, settings: Option<&Bound<'_, PyDict>>) -> PyResult<PyDetection> {
    let mut cfg = TrainConfig::default();
    if let Some(settings) = settings {
        for (k, v) in settings.iter() {
            let key: String = k.extract()?;
            let value = match v.extract::<Vec<usize>>() {
                Ok(list) => list.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                Err(_) => v.str()?.to_string(),
            };
            cfg.set(&key, &value).map_err(to_py)?;
        }
    }
    let det = py
        .detach(|| cliquegan::detect(&graph.inner, &cfg))
        .map_err(to_py)?;
    Ok(PyDetection {
        communities: det.communities.communities.clone(),
        theta_g: rows(&det.state.theta_g),
        theta_d: rows(&det.state.theta_d),
        community_count: det.community_count,
        delta: det.threshold.delta,
        iterations: det.state.iteration,
        history: det.state.history.clone(),
        pretrain_history: det.state.pretrain_history.clone(),
    })
}

/// Best-match F1 between two covers given as lists of vertex lists.
#[pyfunction]
fn f1_score(truth: Vec<Vec<usize>>, detected: Vec<Vec<usize>>) -> PyResult<f64> {
    eval::f1_score(
        &cover(truth, CoverSource::GroundTruth),
        &cover(detected, CoverSource::Detected),
    )
    .map_err(to_py)
}

/// Overlapping NMI between two covers.
#[pyfunction]
fn overlapping_nmi(truth: Vec<Vec<usize>>, detected: Vec<Vec<usize>>) -> PyResult<f64> {
    eval::overlapping_nmi(
        &cover(truth, CoverSource::GroundTruth),
        &cover(detected, CoverSource::Detected),
    )
    .map_err(to_py)
}

/// Probability that vertices with these affiliation rows form a clique.
#[pyfunction]
fn clique_prob(rows: Vec<Vec<f64>>) -> PyResult<f64> {
    let c = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != c) {
        return Err(PyValueError::new_err("need equal-length, nonempty rows"));
    }
    let view: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(agm::clique_prob(&view))
}

/// Membership threshold delta for the graph's edge density.
#[pyfunction]
fn threshold(graph: &PyGraph) -> PyResult<f64> {
    Ok(agm::compute_threshold(&graph.inner).map_err(to_py)?.delta)
}

/// Planted overlapping-community graph; returns `(graph, communities)`.
#[pyfunction]
#[pyo3(signature = (vertices, communities, mean_memberships, p_in=0.95, p_out=0.002, seed=0, heavy_tail=false))]
fn generate_planted(
    vertices: usize,
    communities: usize,
    mean_memberships: f64,
    p_in: f64,
    p_out: f64,
    seed: u64,
    heavy_tail: bool,
) -> PyResult<(PyGraph, Vec<Vec<usize>>)> {
    let spec = PlantedSpec {
        vertices,
        communities,
        mean_memberships,
        heavy_tail,
        p_in,
        p_out,
        seed,
    };
    let (g, truth) = synth::generate(&spec).map_err(to_py)?;
    Ok((PyGraph { inner: g }, truth.communities))
}

/// Default training settings as a `{key: value}` dict of strings.
#[pyfunction]
fn default_config() -> HashMap<String, String> {
    TrainConfig::default()
        .to_text()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[pymodule]
fn cliquegan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyDetection>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(overlapping_nmi, m)?)?;
    m.add_function(wrap_pyfunction!(clique_prob, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(generate_planted, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    Ok(())
}
