//! Python bindings: temporal graphs, query pipelines and the diffusion oracle.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rtlr::bench::{self, Pipeline, SweepConfig};
use rtlr::graph::{load_temporal_edges, partition_snapshots, EdgeList, TemporalEdge};
use rtlr::predictor::{candidate_edges, load_predicted_snapshot, predict_next_snapshot};
use rtlr::{Algorithm, Edge, Error, EvolvingGraph, PredictorKind, SnapshotGraph, VertexId};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        Error::Capacity { .. } => PyRuntimeError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

type LabelEdge = (String, String);

fn edge_labels(g: &EvolvingGraph, edges: impl IntoIterator<Item = Edge>) -> Vec<LabelEdge> {
    edges.into_iter().map(|e| (g.label(e.src).to_string(), g.label(e.dst).to_string())).collect()
}

fn resolve_edges(g: &EvolvingGraph, edges: &[LabelEdge]) -> Result<Vec<Edge>, Error> {
    edges.iter().map(|(a, b)| Ok(Edge { src: g.resolve(a)?, dst: g.resolve(b)? })).collect()
}

/// A temporal edge list cut into equal-width snapshots.
#[pyclass(module = "rtlr_py")]
struct TemporalGraph {
    inner: EvolvingGraph,
}

#[pymethods]
impl TemporalGraph {
    /// Load `src dst ts` lines from `path` and split them into `snapshots` windows.
    #[staticmethod]
    fn from_file(path: &str, snapshots: usize) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| to_py(e.into()))?;
        let list = load_temporal_edges(BufReader::new(file)).map_err(to_py)?;
        Ok(TemporalGraph { inner: partition_snapshots(&list, snapshots).map_err(to_py)? })
    }

    /// Build from `(src, dst, ts)` tuples with string labels.
    #[staticmethod]
    fn from_edges(edges: Vec<(String, String, i64)>, snapshots: usize) -> PyResult<Self> {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut labels = Vec::new();
        let mut intern = |s: String| {
            *ids.entry(s).or_insert_with_key(|k| {
                labels.push(k.clone());
                labels.len() as u32 - 1
            })
        };
        let mut list = Vec::with_capacity(edges.len());
        let mut self_loops = 0;
        for (a, b, ts) in edges {
            let (src, dst) = (intern(a), intern(b));
            if src == dst {
                self_loops += 1;
                continue;
            }
            list.push(TemporalEdge { src: VertexId(src), dst: VertexId(dst), ts });
        }
        if list.is_empty() {
            return Err(to_py(Error::Empty));
        }
        let list = EdgeList { edges: list, labels, self_loops_dropped: self_loops };
        Ok(TemporalGraph { inner: partition_snapshots(&list, snapshots).map_err(to_py)? })
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_snapshots(&self) -> usize {
        self.inner.num_snapshots()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    fn snapshot_edges(&self, index: usize) -> PyResult<Vec<LabelEdge>> {
        let s = self
            .inner
            .snapshots()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("snapshot {index} out of range")))?;
        Ok(edge_labels(&self.inner, s.edges()))
    }

    /// Edges of the predicted next snapshot.
    #[pyo3(signature = (predictor = "persistence"))]
    fn predict(&self, predictor: &str) -> PyResult<Vec<LabelEdge>> {
        let kind: PredictorKind = predictor.parse().map_err(to_py)?;
        let gt = predict_next_snapshot(&self.inner, kind).map_err(to_py)?;
        Ok(edge_labels(&self.inner, gt.edges()))
    }

    /// Historical edges missing from the predicted snapshot.
    #[pyo3(signature = (predictor = "persistence"))]
    fn candidates(&self, predictor: &str) -> PyResult<Vec<LabelEdge>> {
        let kind: PredictorKind = predictor.parse().map_err(to_py)?;
        let gt = predict_next_snapshot(&self.inner, kind).map_err(to_py)?;
        let ce = candidate_edges(&self.inner, &gt).map_err(to_py)?;
        Ok(edge_labels(&self.inner, ce.iter()))
    }

    fn __repr__(&self) -> String {
        format!("TemporalGraph(vertices={}, snapshots={})", self.inner.num_vertices(), self.inner.num_snapshots())
    }
}

#[pyclass(module = "rtlr_py", get_all)]
struct QueryResult {
    algorithm: String,
    edges: Vec<LabelEdge>,
    est_gain: f64,
    probes: u64,
    wall_time_ms: f64,
}

#[pymethods]
impl QueryResult {
    fn __repr__(&self) -> String {
        format!(
            "QueryResult(algorithm={:?}, edges={:?}, est_gain={}, probes={})",
            self.algorithm, self.edges, self.est_gain, self.probes
        )
    }
}

/// Predicted snapshot, candidate edges, sketches and bound index for one graph.
/// The bound index is shared by successive `o-sbg` queries.
#[pyclass(module = "rtlr_py")]
struct QueryPipeline {
    inner: Pipeline,
}

#[pymethods]
impl QueryPipeline {
    /// `gt_edges`, when given, replaces the predictor's output as the predicted snapshot.
    #[new]
    #[pyo3(signature = (graph, predictor = "persistence", theta = 200, seed = 0, gt_edges = None))]
    fn new(graph: &TemporalGraph, predictor: &str, theta: usize, seed: u64, gt_edges: Option<Vec<LabelEdge>>) -> PyResult<Self> {
        let g = graph.inner.clone();
        let gt: SnapshotGraph = match gt_edges {
            Some(edges) => {
                let text: String = edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect();
                load_predicted_snapshot(text.as_bytes(), &g).map_err(to_py)?
            }
            None => predict_next_snapshot(&g, predictor.parse().map_err(to_py)?).map_err(to_py)?,
        };
        Ok(QueryPipeline { inner: Pipeline::new(g, gt, theta, seed).map_err(to_py)? })
    }

    #[getter]
    fn theta(&self) -> usize {
        self.inner.sketches.theta()
    }

    fn candidates(&self) -> Vec<LabelEdge> {
        edge_labels(&self.inner.graph, self.inner.candidates.iter())
    }

    /// Select up to `l` edges for `group` with `sbg`, `ce-sbg` or `o-sbg`.
    #[pyo3(signature = (group, l, algorithm = "o-sbg"))]
    fn query(&mut self, py: Python<'_>, group: Vec<String>, l: usize, algorithm: &str) -> PyResult<QueryResult> {
        let alg: Algorithm = algorithm.parse().map_err(to_py)?;
        let group = self.inner.resolve_group(&group).map_err(to_py)?;
        let inner = &mut self.inner;
        let r = py.detach(|| inner.run(alg, &group, l)).map_err(to_py)?;
        Ok(QueryResult {
            algorithm: alg.name().to_string(),
            edges: edge_labels(&self.inner.graph, r.edges.iter().copied()),
            est_gain: r.est_gain,
            probes: r.probes,
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
        })
    }

    /// Monte Carlo spread gain of reconnecting `edges`: `(mean, stderr)`.
    #[pyo3(signature = (group, edges, trials = 10_000, seed = 0))]
    fn evaluate(&self, py: Python<'_>, group: Vec<String>, edges: Vec<LabelEdge>, trials: u64, seed: u64) -> PyResult<(f64, f64)> {
        let group = self.inner.resolve_group(&group).map_err(to_py)?;
        let edges = resolve_edges(&self.inner.graph, &edges).map_err(to_py)?;
        let gt = &self.inner.gt;
        let est = py.detach(|| bench::evaluate_result(gt, &group, &edges, trials, seed)).map_err(to_py)?;
        Ok((est.mean, est.stderr))
    }

    /// Exact spread gain; raises `RuntimeError` when the graph is too large to enumerate.
    fn exact_gain(&self, group: Vec<String>, edges: Vec<LabelEdge>) -> PyResult<f64> {
        let group = self.inner.resolve_group(&group).map_err(to_py)?;
        let edges = resolve_edges(&self.inner.graph, &edges).map_err(to_py)?;
        bench::exact_gain(&self.inner.gt, &group, &edges).map_err(to_py)
    }

    /// Current first-step bound of candidate `edge` and whether it has been narrowed.
    fn bound(&self, edge: LabelEdge) -> PyResult<(f64, bool)> {
        let e = resolve_edges(&self.inner.graph, &[edge]).map_err(to_py)?[0];
        let id = self
            .inner
            .candidates
            .id_of(e)
            .ok_or_else(|| PyValueError::new_err(format!("{e} is not a candidate edge")))?;
        Ok((self.inner.ubl.ub1(id), self.inner.ubl.is_narrowed(id)))
    }
}

/// Run a sweep described by `key = value` config text; returns the CSV.
#[pyfunction]
fn sweep(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = SweepConfig::from_kv_str(config).map_err(to_py)?;
    let mut out = Vec::new();
    py.detach(|| bench::run_sweep(&cfg, &mut out)).map_err(to_py)?;
    String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Sketch count from the sample-size bound for `|V|`, `l` and `epsilon`.
#[pyfunction]
fn theta_bound(num_vertices: u64, l: u64, epsilon: f64) -> PyResult<f64> {
    rtlr::query::theta_bound(num_vertices, l, epsilon).map_err(to_py)
}

/// Synthetic `(src, dst, ts)` edges from the preferential-attachment generator.
#[pyfunction]
#[pyo3(signature = (num_vertices, seed = 1, edges_per_vertex = 3))]
fn generate_pa(num_vertices: usize, seed: u64, edges_per_vertex: usize) -> PyResult<Vec<(String, String, i64)>> {
    let cfg = rtlr::synth::PaConfig { num_vertices, seed, edges_per_vertex, ..Default::default() };
    let list = rtlr::synth::preferential_attachment(&cfg).map_err(to_py)?;
    Ok(list
        .edges
        .iter()
        .map(|e| (list.labels[e.src.index()].clone(), list.labels[e.dst.index()].clone(), e.ts))
        .collect())
}

#[pymodule]
fn rtlr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TemporalGraph>()?;
    m.add_class::<QueryPipeline>()?;
    m.add_class::<QueryResult>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(theta_bound, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pa, m)?)?;
    Ok(())
}
