#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtlr::predictor::{candidate_edges, predict_next_snapshot};
use rtlr::sketch::{fi_estimate, SketchSet};
use rtlr::{CandidateEdgeSet, Edge, EvolvingGraph, PredictorKind, SnapshotGraph, VertexId};

pub struct Instance {
    pub graph: EvolvingGraph,
    pub gt: SnapshotGraph,
    pub ce: CandidateEdgeSet,
    pub group: Vec<VertexId>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Evolving graph over `n` vertices: a pool of `pool` random directed pairs,
/// each present in each of `t` snapshots with probability 1/2. `G_t` is the
/// last snapshot; the group is drawn from vertices with out-edges in `G_t`.
pub fn random_instance(seed: u64, n: usize, pool: usize, t: usize, group_size: usize) -> Instance {
    let mut r = rng(seed);
    let mut pairs = HashSet::new();
    while pairs.len() < pool {
        let a = r.gen_range(0..n as u32);
        let b = r.gen_range(0..n as u32);
        if a != b {
            pairs.insert((a, b));
        }
    }
    let mut pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
    pairs.sort_unstable();
    let snapshots: Vec<SnapshotGraph> = (0..t)
        .map(|_| {
            let edges: Vec<Edge> = pairs.iter().filter(|_| r.gen_bool(0.5)).map(|&(a, b)| Edge::new(a, b)).collect();
            SnapshotGraph::from_edges(n, edges).unwrap()
        })
        .collect();
    let labels = (0..n).map(|i| format!("u{}", i + 1)).collect();
    let graph = EvolvingGraph::new(labels, snapshots, 0, t as i64).unwrap();
    let gt = predict_next_snapshot(&graph, PredictorKind::PersistenceLast).unwrap();
    let ce = candidate_edges(&graph, &gt).unwrap();
    let mut eligible: Vec<VertexId> = (0..n as u32).map(VertexId).filter(|&v| gt.out_degree(v) > 0).collect();
    if eligible.is_empty() {
        eligible = (0..n as u32).map(VertexId).collect();
    }
    eligible.shuffle(&mut r);
    let mut group: Vec<VertexId> = eligible.into_iter().take(group_size).collect();
    group.sort_unstable();
    Instance { graph, gt, ce, group }
}

/// Small graph (4-7 vertices, at most 10 edges) plus a disjoint pool of
/// candidate edges and a group, for exhaustive checks.
pub struct Enumerable {
    pub gt: SnapshotGraph,
    pub candidates: Vec<Edge>,
    pub group: Vec<VertexId>,
}

pub fn enumerable_instance(seed: u64) -> Enumerable {
    let mut r = rng(seed ^ 0xe0e0);
    let n = r.gen_range(4..=7u32);
    let mut all: Vec<Edge> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| Edge::new(a, b))).collect();
    all.shuffle(&mut r);
    let m = r.gen_range(3..=10usize).min(all.len());
    let gt = SnapshotGraph::from_edges(n as usize, all[..m].iter().copied()).unwrap();
    let k = r.gen_range(1..=4usize).min(all.len() - m);
    let mut candidates = all[m..m + k].to_vec();
    candidates.sort_unstable();
    let group_size = r.gen_range(1..=2usize);
    let mut group: Vec<VertexId> = (0..n).map(VertexId).collect::<Vec<_>>();
    group.shuffle(&mut r);
    group.truncate(group_size);
    group.sort_unstable();
    Enumerable { gt, candidates, group }
}

/// Plain BFS over `edges`, independent of the library's traversal code.
pub fn naive_reach(n: usize, edges: impl IntoIterator<Item = Edge>, sources: &[VertexId]) -> HashSet<VertexId> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.src.index()].push(e.dst);
    }
    let mut seen: HashSet<VertexId> = sources.iter().copied().collect();
    let mut q: VecDeque<VertexId> = sources.iter().copied().collect();
    while let Some(u) = q.pop_front() {
        for &v in &adj[u.index()] {
            if seen.insert(v) {
                q.push_back(v);
            }
        }
    }
    seen
}

/// Per-sketch reach counts of `group` with `live` edges added.
pub fn per_sketch_reach(ss: &SketchSet, group: &[VertexId], live: &[Edge]) -> Vec<usize> {
    ss.sketches()
        .iter()
        .map(|s| naive_reach(ss.num_vertices(), s.edges().chain(live.iter().copied()), group).len())
        .collect()
}

/// SBG replayed with the from-scratch estimator: each round evaluates
/// `fi_estimate` on every remaining candidate, ties to the lower id.
pub fn naive_sbg(ss: &SketchSet, ce: &CandidateEdgeSet, group: &[VertexId], l: usize) -> Vec<Edge> {
    let mut remaining: Vec<Edge> = ce.edges().to_vec();
    let mut selected = Vec::new();
    for _ in 0..l {
        if remaining.is_empty() {
            break;
        }
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (i, &e) in remaining.iter().enumerate() {
            let val = fi_estimate(ss, group, &selected, e);
            if val > best_val {
                best_val = val;
                best = i;
            }
        }
        selected.push(remaining.remove(best));
    }
    selected
}

pub fn mean_std(xs: &[usize]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
