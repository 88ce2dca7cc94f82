//! Reconnecting top-l relationships queries.
//!
//! Three algorithms share one sketch set:
//!
//! * **SBG** probes every remaining candidate each round and keeps the one
//!   with the largest estimated spread.
//! * **CE-SBG** is SBG over the candidates that survive [`prune_candidates`].
//! * **O-SBG** keeps candidates in a max-queue keyed by an upper bound on
//!   their marginal gain and stops probing a round as soon as the best gain
//!   seen so far beats the next bound. Bounds come from a [`UblIndex`] that
//!   is narrowed as a side effect of probing and persists across queries.
//!
//! All estimates are integer reach counts summed over sketches; they are
//! divided by θ only when reported, so comparisons and ties are exact.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, SnapshotGraph, VertexId};
use crate::predictor::CandidateEdgeSet;
use crate::reach::{bfs, BonusEdges, Scratch};
use crate::sketch::{mark_edge_reach, mark_group_reach, row_gain, ReachMarks, SketchSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Sbg,
    CeSbg,
    OSbg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sbg, Algorithm::CeSbg, Algorithm::OSbg];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sbg => "sbg",
            Algorithm::CeSbg => "ce_sbg",
            Algorithm::OSbg => "o_sbg",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sbg" => Ok(Algorithm::Sbg),
            "ce_sbg" => Ok(Algorithm::CeSbg),
            "o_sbg" | "osbg" => Ok(Algorithm::OSbg),
            _ => Err(Error::arg(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryResult {
    pub algorithm: Algorithm,
    /// Selected edges in selection order.
    pub edges: Vec<Edge>,
    /// Estimated spread increase over the group's baseline, in vertices.
    pub est_gain: f64,
    /// Number of marginal-gain evaluations.
    pub probes: u64,
    pub wall_time: Duration,
}

/// Vertices reachable from `group` in `gt` (group included).
fn group_closure(gt: &SnapshotGraph, group: &[VertexId]) -> Vec<bool> {
    let mut visited = vec![false; gt.num_vertices()];
    let mut scratch = Scratch::new(gt.num_vertices());
    bfs(
        &mut scratch,
        group.iter().copied(),
        |u| gt.neighbors(u).iter().copied(),
        &BonusEdges::default(),
        |_| false,
        |v| visited[v.index()] = true,
    );
    visited
}

/// Keep candidates with at least one endpoint reachable from `group` in `gt`.
/// Order is preserved.
pub fn prune_candidates(ce: &CandidateEdgeSet, group: &[VertexId], gt: &SnapshotGraph) -> CandidateEdgeSet {
    let visited = group_closure(gt, group);
    CandidateEdgeSet::new(
        ce.iter()
            .filter(|e| visited[e.src.index()] || visited[e.dst.index()])
            .collect(),
    )
}

fn check_group(ss: &SketchSet, group: &[VertexId]) -> Result<()> {
    if group.is_empty() {
        return Err(Error::arg("query group is empty"));
    }
    match group.iter().find(|v| v.index() >= ss.num_vertices()) {
        Some(v) => Err(Error::arg(format!("group vertex {v} outside 0..{}", ss.num_vertices()))),
        None => Ok(()),
    }
}

/// `(gain, id)` with the larger gain winning and ties going to the smaller id.
#[inline]
fn better(a: (u64, usize), b: (u64, usize)) -> (u64, usize) {
    if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

fn greedy(candidates: &CandidateEdgeSet, group: &[VertexId], l: usize, ss: &SketchSet) -> (Vec<Edge>, u64, f64) {
    let theta = ss.theta();
    let n = ss.num_vertices();
    let mut marks = mark_group_reach(ss, group);
    let baseline = marks.total();
    let mut remaining: Vec<Edge> = candidates.edges().to_vec();
    let mut selected = Vec::with_capacity(l);
    let mut probes = 0u64;

    for _ in 0..l {
        if remaining.is_empty() {
            break;
        }
        probes += remaining.len() as u64;
        let bonus = BonusEdges::new(&selected);
        let (_, best) = remaining
            .par_iter()
            .enumerate()
            .map_init(
                || Scratch::new(n),
                |scratch, (i, &e)| {
                    let gain: u64 = (0..theta).map(|k| row_gain(ss, &marks, k, &bonus, e, scratch)).sum();
                    (gain, i)
                },
            )
            .reduce(|| (0, usize::MAX), better);
        let chosen = remaining.remove(best);
        selected.push(chosen);
        mark_edge_reach(ss, &mut marks, &selected, chosen);
    }
    let gain = (marks.total() - baseline) as f64 / theta as f64;
    (selected, probes, gain)
}

/// SBG: `l` greedy rounds, each probing every remaining candidate.
pub fn sbg_query(ce: &CandidateEdgeSet, group: &[VertexId], l: usize, ss: &SketchSet) -> Result<QueryResult> {
    check_group(ss, group)?;
    let start = Instant::now();
    let (edges, probes, est_gain) = greedy(ce, group, l, ss);
    Ok(QueryResult { algorithm: Algorithm::Sbg, edges, est_gain, probes, wall_time: start.elapsed() })
}

/// CE-SBG: SBG over the pruned candidate set.
pub fn ce_sbg_query(
    gt: &SnapshotGraph,
    ce: &CandidateEdgeSet,
    group: &[VertexId],
    l: usize,
    ss: &SketchSet,
) -> Result<QueryResult> {
    check_group(ss, group)?;
    let start = Instant::now();
    let pruned = prune_candidates(ce, group, gt);
    let (edges, probes, est_gain) = greedy(&pruned, group, l, ss);
    Ok(QueryResult { algorithm: Algorithm::CeSbg, edges, est_gain, probes, wall_time: start.elapsed() })
}

/// Upper-bound label index: for each candidate edge `(u, v)` a first-step
/// bound on its marginal gain and whether that bound has been narrowed.
///
/// Bounds are stored scaled by θ. Unnarrowed, the bound is θ·|reach(v, G_t)|;
/// narrowed, it is Σ_k |reach(v, sketch k)|.
#[derive(Clone, Debug)]
pub struct UblIndex {
    sketches: Arc<SketchSet>,
    candidates: CandidateEdgeSet,
    ub1: Vec<u64>,
    narrowed: Vec<bool>,
    touching: Vec<Vec<usize>>,
}

/// Build the index for `ce` against `ss`.
pub fn build_ubl(ce: &CandidateEdgeSet, gt: &SnapshotGraph, ss: Arc<SketchSet>) -> Result<UblIndex> {
    if gt.num_vertices() != ss.num_vertices() {
        return Err(Error::arg("sketch set and predicted snapshot disagree on |V|"));
    }
    let n = gt.num_vertices();
    let theta = ss.theta() as u64;
    let mut heads: Vec<VertexId> = ce.iter().map(|e| e.dst).collect();
    heads.sort_unstable();
    heads.dedup();
    let sizes: Vec<u64> = heads
        .par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, &v| {
                let mut c = 0u64;
                bfs(scratch, [v], |u| gt.neighbors(u).iter().copied(), &BonusEdges::default(), |_| false, |_| c += 1);
                c
            },
        )
        .collect();
    let ub1 = ce
        .iter()
        .map(|e| sizes[heads.binary_search(&e.dst).unwrap()] * theta)
        .collect();
    let mut touching = vec![Vec::new(); n];
    for (id, e) in ce.iter().enumerate() {
        touching[e.src.index()].push(id);
        touching[e.dst.index()].push(id);
    }
    Ok(UblIndex { sketches: ss, candidates: ce.clone(), ub1, narrowed: vec![false; ce.len()], touching })
}

impl UblIndex {
    pub fn sketches(&self) -> &Arc<SketchSet> {
        &self.sketches
    }

    pub fn candidates(&self) -> &CandidateEdgeSet {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.ub1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ub1.is_empty()
    }

    /// First-step bound of candidate `id`, in vertices.
    pub fn ub1(&self, id: usize) -> f64 {
        self.ub1[id] as f64 / self.sketches.theta() as f64
    }

    /// First-step bound of candidate `id` scaled by θ.
    pub fn ub1_scaled(&self, id: usize) -> u64 {
        self.ub1[id]
    }

    pub fn is_narrowed(&self, id: usize) -> bool {
        self.narrowed[id]
    }

    pub fn narrowed_count(&self) -> usize {
        self.narrowed.iter().filter(|&&f| f).count()
    }

    /// Marginal gain of candidate `id` summed over sketches; narrows its
    /// first-step bound on first use.
    fn estimate_scaled(&mut self, marks: &ReachMarks, bonus: &BonusEdges, id: usize) -> u64 {
        let ss = &*self.sketches;
        let e = self.candidates.get(id);
        let n = ss.num_vertices();
        if self.narrowed[id] {
            return (0..ss.theta())
                .into_par_iter()
                .map_init(|| Scratch::new(n), |scratch, k| row_gain(ss, marks, k, bonus, e, scratch))
                .sum();
        }
        let (count, count_r) = (0..ss.theta())
            .into_par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, k| {
                    let gain = row_gain(ss, marks, k, bonus, e, scratch);
                    let sketch = ss.sketch(k);
                    let mut reach = 0u64;
                    bfs(
                        scratch,
                        [e.dst],
                        |u| sketch.neighbors(u).iter().copied(),
                        &BonusEdges::default(),
                        |_| false,
                        |_| reach += 1,
                    );
                    (gain, reach)
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        debug_assert!(count_r <= self.ub1[id]);
        self.ub1[id] = count_r.min(self.ub1[id]);
        self.narrowed[id] = true;
        count
    }
}

/// Marginal gain of reconnecting candidate `id` given the current marks and
/// the edges already selected. Narrows the candidate's first-step bound the
/// first time it is probed.
pub fn sketch_estimate(ubl: &mut UblIndex, marks: &ReachMarks, selected: &[Edge], id: usize) -> f64 {
    let bonus = BonusEdges::new(selected);
    ubl.estimate_scaled(marks, &bonus, id) as f64 / ubl.sketches.theta() as f64
}

/// Max-queue of `(bound, candidate id)`; equal bounds pop the smaller id first.
#[derive(Clone, Debug, Default)]
pub struct ProbeQueue {
    heap: BinaryHeap<(u64, Reverse<usize>)>,
}

impl ProbeQueue {
    pub fn push(&mut self, id: usize, bound: u64) {
        self.heap.push((bound, Reverse(id)));
    }

    pub fn pop(&mut self) -> Option<(usize, u64)> {
        self.heap.pop().map(|(b, Reverse(id))| (id, b))
    }

    pub fn peek(&self) -> Option<(usize, u64)> {
        self.heap.peek().map(|&(b, Reverse(id))| (id, b))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

fn reverse_adjacency(gt: &SnapshotGraph) -> Vec<Vec<VertexId>> {
    let mut rev = vec![Vec::new(); gt.num_vertices()];
    for e in gt.edges() {
        rev[e.dst.index()].push(e.src);
    }
    rev
}

/// Vertices that reach `target` in `gt` plus the selected edges, avoiding
/// `blocked` ones.
fn reaches_vertex(
    reverse: &[Vec<VertexId>],
    selected: &[Edge],
    target: VertexId,
    blocked: &[bool],
    scratch: &mut Scratch,
) -> Vec<bool> {
    let flipped: Vec<Edge> = selected.iter().map(|e| Edge { src: e.dst, dst: e.src }).collect();
    let mut hit = vec![false; reverse.len()];
    bfs(
        scratch,
        [target],
        |u| reverse[u.index()].iter().copied(),
        &BonusEdges::new(&flipped),
        |v| v != target && blocked[v.index()],
        |v| hit[v.index()] = true,
    );
    hit
}

/// `|reach(v)|` in `gt` plus `bonus`, memoised per round.
fn graph_reach(
    gt: &SnapshotGraph,
    bonus: &BonusEdges,
    v: VertexId,
    memo: &mut HashMap<VertexId, u64>,
    scratch: &mut Scratch,
) -> u64 {
    *memo.entry(v).or_insert_with(|| {
        let mut c = 0u64;
        bfs(scratch, [v], |u| gt.neighbors(u).iter().copied(), bonus, |_| false, |_| c += 1);
        c
    })
}

/// [`ProbeQueue`] that tracks each candidate's current key, so re-keying a
/// queued candidate leaves a stale heap entry that is skipped on the way out.
struct LiveQueue {
    heap: ProbeQueue,
    key: Vec<Option<u64>>,
    live: usize,
}

impl LiveQueue {
    fn new(n: usize) -> Self {
        LiveQueue { heap: ProbeQueue::default(), key: vec![None; n], live: 0 }
    }

    fn push(&mut self, id: usize, bound: u64) {
        if self.key[id].replace(bound).is_none() {
            self.live += 1;
        }
        self.heap.push(id, bound);
    }

    /// Re-key `id` to `bound` unless it is already queued at least that high.
    fn raise(&mut self, id: usize, bound: u64) {
        if self.key[id].is_none_or(|k| k < bound) {
            self.push(id, bound);
        }
    }

    fn key(&self, id: usize) -> Option<u64> {
        self.key[id]
    }

    fn discard_stale(&mut self) {
        while let Some((id, bound)) = self.heap.peek() {
            if self.key[id] == Some(bound) {
                break;
            }
            self.heap.pop();
        }
    }

    fn pop(&mut self) -> Option<(usize, u64)> {
        self.discard_stale();
        let (id, bound) = self.heap.pop()?;
        self.key[id] = None;
        self.live -= 1;
        Some((id, bound))
    }

    fn peek(&mut self) -> Option<(usize, u64)> {
        self.discard_stale();
        self.heap.peek()
    }

    fn is_empty(&self) -> bool {
        self.live == 0
    }
}

/// O-SBG: lazy greedy over pruned candidates driven by the index bounds.
///
/// Each round pops candidates in bound order and probes them until the best
/// gain seen beats the next bound (an equal bound only continues if its id is
/// smaller, matching SBG's tie rule). Probed losers return to the queue keyed
/// by their fresh gain. After a selection, pruned candidates touching a newly
/// reached vertex join the queue with their first-step bound.
///
/// Reconnection gains are not submodular: a selection can raise the gain of
/// an edge whose tail it reaches, or of an edge whose head leads into the
/// selected edge's tail. Queued keys of such edges are raised by the most the
/// selection could have added, so a stale low key does not hide them.
pub fn osbg_query(gt: &SnapshotGraph, group: &[VertexId], l: usize, ubl: &mut UblIndex) -> Result<QueryResult> {
    let ss = Arc::clone(&ubl.sketches);
    check_group(&ss, group)?;
    if gt.num_vertices() != ss.num_vertices() {
        return Err(Error::arg("predicted snapshot does not match the index"));
    }
    let start = Instant::now();
    let theta = ss.theta();

    let visited = group_closure(gt, group);
    let mut in_pool: Vec<bool> = ubl
        .candidates
        .iter()
        .map(|e| visited[e.src.index()] || visited[e.dst.index()])
        .collect();
    let mut queue = LiveQueue::new(ubl.len());
    for (id, _) in in_pool.iter().enumerate().filter(|(_, &p)| p) {
        // An unreached tail contributes nothing until a selection reaches it,
        // at which point the entry is re-keyed below.
        let reached = visited[ubl.candidates.get(id).src.index()];
        queue.push(id, if reached { ubl.ub1[id] } else { 0 });
    }

    let reverse = reverse_adjacency(gt);
    let mut scratch = Scratch::new(gt.num_vertices());
    let mut marks = mark_group_reach(&ss, group);
    let baseline = marks.total();
    let mut marked_in: Vec<u64> = (0..gt.num_vertices() as u32)
        .map(|v| (0..theta).filter(|&k| marks.is_marked(k, VertexId(v))).count() as u64)
        .collect();
    let mut selected: Vec<Edge> = Vec::with_capacity(l);
    let mut probes = 0u64;
    let mut probed: Vec<(usize, u64)> = Vec::new();

    for _ in 0..l {
        if queue.is_empty() {
            break;
        }
        let bonus = BonusEdges::new(&selected);
        probed.clear();
        let mut best = (0u64, usize::MAX);
        while let Some((id, _)) = queue.pop() {
            let gain = ubl.estimate_scaled(&marks, &bonus, id);
            probes += 1;
            probed.push((id, gain));
            best = better((gain, id), best);
            match queue.peek() {
                Some((next, bound)) if bound > best.0 || (bound == best.0 && next < best.1) => {}
                _ => break,
            }
        }
        let chosen_id = best.1;
        for &(id, gain) in &probed {
            if id != chosen_id {
                queue.push(id, gain);
            }
        }
        let chosen = ubl.candidates.get(chosen_id);
        selected.push(chosen);
        let fresh = mark_edge_reach(&ss, &mut marks, &selected, chosen);
        let bonus = BonusEdges::new(&selected);
        let mut reach_with_bonus: HashMap<VertexId, u64> = HashMap::new();
        for v in fresh {
            let now = (0..theta).filter(|&k| marks.is_marked(k, v)).count() as u64;
            let newly = now - std::mem::replace(&mut marked_in[v.index()], now);
            for &cid in &ubl.touching[v.index()] {
                let e = ubl.candidates.get(cid);
                if cid == chosen_id || selected.contains(&e) {
                    continue;
                }
                if !in_pool[cid] {
                    in_pool[cid] = true;
                    queue.push(cid, ubl.ub1[cid]);
                } else if e.src == v {
                    // The gain can only have grown in sketches where the tail
                    // was just reached, by at most the head's reach there.
                    let size = graph_reach(gt, &bonus, e.dst, &mut reach_with_bonus, &mut scratch);
                    if let Some(key) = queue.key(cid) {
                        queue.raise(cid, key + newly * size);
                    }
                }
            }
        }
        // Reaching the chosen tail now also crosses the chosen edge, so gains
        // measured from heads upstream of it are stale as well. Vertices
        // reached in every sketch cannot carry such a path.
        if selected.len() < l {
            let everywhere: Vec<bool> =
                (0..gt.num_vertices() as u32).map(|v| (0..theta).all(|k| marks.is_marked(k, VertexId(v)))).collect();
            if !everywhere[chosen.src.index()] {
                let upstream = reaches_vertex(&reverse, &selected, chosen.src, &everywhere, &mut scratch);
                // In each sketch where the chosen tail is still unreached, the
                // cascade adds at most what the chosen head reaches.
                let open = theta as u64 - marked_in[chosen.src.index()];
                let step = open * graph_reach(gt, &bonus, chosen.dst, &mut reach_with_bonus, &mut scratch);
                for (cid, e) in ubl.candidates.iter().enumerate() {
                    if in_pool[cid] && upstream[e.dst.index()] && !selected.contains(&e) {
                        let full = graph_reach(gt, &bonus, e.dst, &mut reach_with_bonus, &mut scratch) * theta as u64;
                        if let Some(key) = queue.key(cid) {
                            queue.raise(cid, (key + step).min(full.max(key)));
                        }
                    }
                }
            }
        }
    }

    Ok(QueryResult {
        algorithm: Algorithm::OSbg,
        edges: selected,
        est_gain: (marks.total() - baseline) as f64 / theta as f64,
        probes,
        wall_time: start.elapsed(),
    })
}

/// Sketch count from the sample-size bound
/// `(8 + 2ε)·|V|·(ln|V| + ln C(|V|, l) + ln 2) / ε²`.
pub fn theta_bound(num_vertices: u64, l: u64, epsilon: f64) -> Result<f64> {
    if num_vertices == 0 || l > num_vertices {
        return Err(Error::arg("need 0 <= l <= |V| and |V| >= 1"));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::arg("epsilon must be positive"));
    }
    let n = num_vertices as f64;
    let k = l.min(num_vertices - l);
    let ln_choose: f64 = (1..=k).map(|i| ((num_vertices - k + i) as f64).ln() - (i as f64).ln()).sum();
    Ok((8.0 + 2.0 * epsilon) * n * (n.ln() + ln_choose + 2f64.ln()) / (epsilon * epsilon))
}
