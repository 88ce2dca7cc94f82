//! Query pipelines, parameter sweeps and CSV result rows.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::{load_temporal_edges, partition_snapshots, Edge, EvolvingGraph, SnapshotGraph, VertexId};
use crate::oracle::{exact_spread, mc_gain, SeedSpec, SpreadEstimate};
use crate::predictor::{candidate_edges, load_predicted_snapshot, predict_next_snapshot, CandidateEdgeSet, PredictorKind};
use crate::query::{build_ubl, ce_sbg_query, osbg_query, sbg_query, Algorithm, QueryResult, UblIndex};
use crate::rng;
use crate::sketch::{generate_sketches, SketchSet, DEFAULT_THETA};

pub const CSV_HEADER: &str = "query_id,algorithm,l,group,runtime_ms,probes,est_gain,mc_gain,edges";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub dataset: Option<PathBuf>,
    pub gt_file: Option<PathBuf>,
    pub snapshots: usize,
    pub theta: usize,
    pub l_values: Vec<usize>,
    pub group_sizes: Vec<usize>,
    pub queries: usize,
    pub predictor: PredictorKind,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub eval_trials: u64,
    /// Fill `runtime_ms`; off by default so output is reproducible.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dataset: None,
            gt_file: None,
            snapshots: 100,
            theta: DEFAULT_THETA,
            l_values: vec![10],
            group_sizes: vec![6],
            queries: 80,
            predictor: PredictorKind::PersistenceLast,
            algorithms: Algorithm::ALL.to_vec(),
            seed: 0,
            eval_trials: 0,
            timing: false,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::arg(format!("bad value {s:?} for {key}"))))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::arg(format!("{key} needs at least one value")));
    }
    Ok(items)
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::arg(format!("bad value {value:?} for {key}")))
}

pub fn parse_algorithms(value: &str) -> Result<Vec<Algorithm>> {
    if value.trim() == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    let mut algs: Vec<Algorithm> = parse_list("algorithm", value)?;
    algs.sort();
    algs.dedup();
    Ok(algs)
}

impl SweepConfig {
    /// Apply one `key = value` setting. Keys match the CLI flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim().replace('_', "-").as_str() {
            "dataset" => self.dataset = Some(PathBuf::from(value.trim())),
            "gt-file" => self.gt_file = Some(PathBuf::from(value.trim())),
            "snapshots" => self.snapshots = parse_one(key, value)?,
            "theta" => self.theta = parse_one(key, value)?,
            "l" => self.l_values = parse_list(key, value)?,
            "group-size" => self.group_sizes = parse_list(key, value)?,
            "queries" => self.queries = parse_one(key, value)?,
            "predictor" => self.predictor = value.trim().parse()?,
            "algorithm" => self.algorithms = parse_algorithms(value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "eval-trials" => self.eval_trials = parse_one(key, value)?,
            "timing" => self.timing = parse_one(key, value)?,
            other => return Err(Error::arg(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a flat `key = value` file; `#` starts a comment line.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key=value, got {line:?}") })?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.snapshots == 0 || self.theta == 0 || self.queries == 0 {
            return Err(Error::arg("snapshots, theta and queries must be positive"));
        }
        if self.l_values.is_empty() || self.group_sizes.is_empty() || self.algorithms.is_empty() {
            return Err(Error::arg("l, group-size and algorithm lists must be non-empty"));
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::arg("group size must be positive"));
        }
        Ok(())
    }
}

/// Everything a query needs, built once: graph, predicted snapshot,
/// candidates, sketches and the (mutable, cross-query) bound index.
#[derive(Debug)]
pub struct Pipeline {
    pub graph: EvolvingGraph,
    pub gt: SnapshotGraph,
    pub candidates: CandidateEdgeSet,
    pub sketches: Arc<SketchSet>,
    pub ubl: UblIndex,
}

impl Pipeline {
    pub fn new(graph: EvolvingGraph, gt: SnapshotGraph, theta: usize, seed: u64) -> Result<Self> {
        let candidates = candidate_edges(&graph, &gt)?;
        let sketches = Arc::new(generate_sketches(&gt, theta, seed)?);
        let ubl = build_ubl(&candidates, &gt, Arc::clone(&sketches))?;
        Ok(Pipeline { graph, gt, candidates, sketches, ubl })
    }

    pub fn from_config(cfg: &SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let path = cfg.dataset.as_deref().ok_or_else(|| Error::arg("no dataset given"))?;
        let graph = load_graph(path, cfg.snapshots)?;
        let gt = match &cfg.gt_file {
            Some(p) => load_predicted_snapshot(BufReader::new(File::open(p)?), &graph)?,
            None => predict_next_snapshot(&graph, cfg.predictor)?,
        };
        Pipeline::new(graph, gt, cfg.theta, cfg.seed)
    }

    pub fn resolve_group<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<VertexId>> {
        let mut group = labels.iter().map(|l| self.graph.resolve(l.as_ref())).collect::<Result<Vec<_>>>()?;
        group.sort_unstable();
        group.dedup();
        Ok(group)
    }

    pub fn run(&mut self, algorithm: Algorithm, group: &[VertexId], l: usize) -> Result<QueryResult> {
        match algorithm {
            Algorithm::Sbg => sbg_query(&self.candidates, group, l, &self.sketches),
            Algorithm::CeSbg => ce_sbg_query(&self.gt, &self.candidates, group, l, &self.sketches),
            Algorithm::OSbg => osbg_query(&self.gt, group, l, &mut self.ubl),
        }
    }

    /// Vertices with at least one out-edge in `G_t`.
    pub fn eligible_seeds(&self) -> Vec<VertexId> {
        (0..self.gt.num_vertices() as u32)
            .map(VertexId)
            .filter(|&v| self.gt.out_degree(v) > 0)
            .collect()
    }

    fn join_group(&self, group: &[VertexId]) -> String {
        group.iter().map(|&v| self.graph.label(v)).collect::<Vec<_>>().join(";")
    }

    fn join_edges(&self, edges: &[Edge]) -> String {
        edges
            .iter()
            .map(|e| format!("{}->{}", self.graph.label(e.src), self.graph.label(e.dst)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn load_graph(path: &Path, snapshots: usize) -> Result<EvolvingGraph> {
    let file = File::open(path)?;
    partition_snapshots(&load_temporal_edges(BufReader::new(file))?, snapshots)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub query_id: usize,
    pub algorithm: Algorithm,
    pub l: usize,
    pub group: String,
    pub runtime_ms: Option<f64>,
    pub probes: u64,
    pub est_gain: f64,
    pub mc_gain: Option<f64>,
    pub edges: String,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.query_id,
            self.algorithm,
            self.l,
            self.group,
            opt(self.runtime_ms),
            self.probes,
            self.est_gain,
            opt(self.mc_gain),
            self.edges
        )
    }
}

/// Options shared by every query in a run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub eval_trials: u64,
    pub seed: u64,
    pub timing: bool,
}

/// Run each requested algorithm (in `sbg, ce_sbg, o_sbg` order) on one group.
pub fn run_query(
    p: &mut Pipeline,
    query_id: usize,
    group: &[VertexId],
    l: usize,
    algorithms: &[Algorithm],
    opts: RunOptions,
) -> Result<Vec<ResultRow>> {
    let mut algs = algorithms.to_vec();
    algs.sort();
    algs.dedup();
    let mut rows = Vec::with_capacity(algs.len());
    for alg in algs {
        let r = p.run(alg, group, l)?;
        let mc_gain = if opts.eval_trials > 0 {
            Some(evaluate_result(&p.gt, group, &r.edges, opts.eval_trials, opts.seed)?.mean)
        } else {
            None
        };
        rows.push(ResultRow {
            query_id,
            algorithm: alg,
            l,
            group: p.join_group(group),
            runtime_ms: opts.timing.then_some(r.wall_time.as_secs_f64() * 1e3),
            probes: r.probes,
            est_gain: r.est_gain,
            mc_gain,
            edges: p.join_edges(&r.edges),
        });
    }
    Ok(rows)
}

/// Monte-Carlo spread gain of reconnecting `edges`, with common random
/// numbers across the with/without arms.
pub fn evaluate_result(gt: &SnapshotGraph, group: &[VertexId], edges: &[Edge], trials: u64, seed: u64) -> Result<SpreadEstimate> {
    mc_gain(gt, group, edges, trials, seed)
}

/// Exact spread gain by world enumeration (small graphs only).
pub fn exact_gain(gt: &SnapshotGraph, group: &[VertexId], edges: &[Edge]) -> Result<f64> {
    let with = exact_spread(gt, &SeedSpec::new(group.to_vec(), edges.to_vec()))?;
    let without = exact_spread(gt, &SeedSpec::seeds(group))?;
    Ok(with.mean - without.mean)
}

/// `count` groups of up to `size` distinct vertices drawn uniformly from
/// `eligible`. Group `i` depends only on `(seed, size, i)`.
pub fn sample_groups(eligible: &[VertexId], size: usize, count: usize, seed: u64) -> Result<Vec<Vec<VertexId>>> {
    if eligible.is_empty() {
        return Err(Error::arg("no vertex has an out-edge in the predicted snapshot"));
    }
    let k = size.min(eligible.len());
    Ok((0..count)
        .map(|i| {
            let mut r = rng::stream(seed, rng::DOMAIN_GROUPS, ((size as u64) << 32) | i as u64);
            let mut g: Vec<VertexId> = index::sample(&mut r, eligible.len(), k).into_iter().map(|j| eligible[j]).collect();
            g.sort_unstable();
            g
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Option<Algorithm>,
    pub rows: usize,
    pub mean_probes: f64,
    pub mean_runtime_ms: Option<f64>,
    pub mean_est_gain: f64,
    pub mean_mc_gain: Option<f64>,
}

fn summarize(rows: &[ResultRow], alg: Algorithm) -> AlgorithmSummary {
    let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.algorithm == alg).collect();
    let n = sel.len().max(1) as f64;
    let mean_opt = |f: &dyn Fn(&ResultRow) -> Option<f64>| -> Option<f64> {
        let vals: Option<Vec<f64>> = sel.iter().map(|r| f(r)).collect();
        vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    AlgorithmSummary {
        algorithm: Some(alg),
        rows: sel.len(),
        mean_probes: sel.iter().map(|r| r.probes as f64).sum::<f64>() / n,
        mean_runtime_ms: mean_opt(&|r| r.runtime_ms),
        mean_est_gain: sel.iter().map(|r| r.est_gain).sum::<f64>() / n,
        mean_mc_gain: mean_opt(&|r| r.mc_gain),
    }
}

/// Run every `(group size, l)` combination over `cfg.queries` sampled groups
/// and stream CSV rows to `out`, followed by `#`-prefixed summary lines.
/// Returns all rows.
pub fn run_sweep<W: Write>(cfg: &SweepConfig, out: W) -> Result<Vec<ResultRow>> {
    let mut p = Pipeline::from_config(cfg)?;
    run_sweep_on(&mut p, cfg, out)
}

/// [`run_sweep`] against an already built pipeline.
pub fn run_sweep_on<W: Write>(p: &mut Pipeline, cfg: &SweepConfig, mut out: W) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let opts = RunOptions { eval_trials: cfg.eval_trials, seed: cfg.seed, timing: cfg.timing };
    let eligible = p.eligible_seeds();
    writeln!(out, "{CSV_HEADER}")?;
    let mut all = Vec::new();
    for (si, &size) in cfg.group_sizes.iter().enumerate() {
        let groups = sample_groups(&eligible, size, cfg.queries, cfg.seed)?;
        for &l in &cfg.l_values {
            for (q, group) in groups.iter().enumerate() {
                let rows = run_query(p, si * cfg.queries + q, group, l, &cfg.algorithms, opts)?;
                for r in &rows {
                    writeln!(out, "{}", r.to_csv())?;
                }
                all.extend(rows);
            }
        }
    }
    let mut algs = cfg.algorithms.clone();
    algs.sort();
    algs.dedup();
    for alg in algs {
        let s = summarize(&all, alg);
        let mut line = format!("# summary algorithm={alg} rows={} mean_probes={}", s.rows, s.mean_probes);
        if let Some(t) = s.mean_runtime_ms {
            let _ = write!(line, " mean_runtime_ms={t}");
        }
        let _ = write!(line, " mean_est_gain={}", s.mean_est_gain);
        if let Some(m) = s.mean_mc_gain {
            let _ = write!(line, " mean_mc_gain={m}");
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(all)
}

/// Per-algorithm summaries of `rows`.
pub fn summaries(rows: &[ResultRow]) -> Vec<AlgorithmSummary> {
    Algorithm::ALL
        .iter()
        .filter(|&&a| rows.iter().any(|r| r.algorithm == a))
        .map(|&a| summarize(rows, a))
        .collect()
}
