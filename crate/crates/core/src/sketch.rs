//! Forward-influence sketches.
//!
//! A sketch is a live-edge sample of `G_t`: edge `(u, v)` survives with
//! probability `p(u, v)`. Averaging forward reach over θ sketches estimates
//! IC spread. [`ReachMarks`] keeps, per sketch, the vertices already reached by
//! the query group and the edges selected so far.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, SnapshotGraph, VertexId};
use crate::reach::{bfs, BonusEdges, Scratch};
use crate::rng;

/// Number of sketches used when none is configured.
pub const DEFAULT_THETA: usize = 200;

/// One sampled subgraph in CSR form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sketch {
    offsets: Vec<u32>,
    targets: Vec<VertexId>,
}

impl Sketch {
    fn sample(gt: &SnapshotGraph, seed: u64, index: u64) -> Self {
        let mut rng = rng::stream(seed, rng::DOMAIN_SKETCH, index);
        let n = gt.num_vertices();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for u in 0..n {
            for idx in gt.edge_range(VertexId(u as u32)) {
                if rng.gen::<f64>() < gt.edge_probability(idx) {
                    targets.push(gt.edge_target(idx));
                }
            }
            offsets.push(targets.len() as u32);
        }
        Sketch { offsets, targets }
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v.index()] as usize..self.offsets[v.index() + 1] as usize]
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.neighbors(e.src).binary_search(&e.dst).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_vertices()).flat_map(move |u| {
            let src = VertexId(u as u32);
            self.neighbors(src).iter().map(move |&dst| Edge { src, dst })
        })
    }
}

/// θ immutable sketches of one predicted snapshot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchSet {
    num_vertices: usize,
    base_seed: u64,
    sketches: Vec<Sketch>,
}

impl SketchSet {
    pub fn theta(&self) -> usize {
        self.sketches.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn sketches(&self) -> &[Sketch] {
        &self.sketches
    }

    pub fn sketch(&self, k: usize) -> &Sketch {
        &self.sketches[k]
    }
}

/// Sample `theta` sketches. Sketch `j` depends only on `(gt, seed, j)`.
pub fn generate_sketches(gt: &SnapshotGraph, theta: usize, seed: u64) -> Result<SketchSet> {
    if theta == 0 {
        return Err(Error::arg("theta must be >= 1"));
    }
    let sketches = (0..theta as u64).into_par_iter().map(|j| Sketch::sample(gt, seed, j)).collect();
    Ok(SketchSet { num_vertices: gt.num_vertices(), base_seed: seed, sketches })
}

/// Forward closure of `sources` in `sketch` (sources included), sorted.
pub fn reach_set(sketch: &Sketch, sources: &[VertexId]) -> Vec<VertexId> {
    let mut scratch = Scratch::new(sketch.num_vertices());
    let mut out = Vec::new();
    bfs(
        &mut scratch,
        sources.iter().copied(),
        |u| sketch.neighbors(u).iter().copied(),
        &BonusEdges::default(),
        |_| false,
        |v| out.push(v),
    );
    out.sort_unstable();
    out
}

/// Total reach of `group` over all sketches with `live` edges added.
pub fn reach_count(ss: &SketchSet, group: &[VertexId], live: &[Edge]) -> u64 {
    let bonus = BonusEdges::new(live);
    ss.sketches
        .par_iter()
        .map_init(
            || Scratch::new(ss.num_vertices),
            |scratch, sketch| {
                let mut count = 0u64;
                bfs(
                    scratch,
                    group.iter().copied(),
                    |u| sketch.neighbors(u).iter().copied(),
                    &bonus,
                    |_| false,
                    |_| count += 1,
                );
                count
            },
        )
        .sum()
}

/// Estimated spread of `group` with `selected ∪ {probe}` reconnected, computed
/// from scratch in every sketch.
pub fn fi_estimate(ss: &SketchSet, group: &[VertexId], selected: &[Edge], probe: Edge) -> f64 {
    let mut live = selected.to_vec();
    live.push(probe);
    reach_count(ss, group, &live) as f64 / ss.theta() as f64
}

/// Estimated spread of `group` with `selected` reconnected.
pub fn spread_estimate(ss: &SketchSet, group: &[VertexId], selected: &[Edge]) -> f64 {
    reach_count(ss, group, selected) as f64 / ss.theta() as f64
}

/// Per-sketch record of vertices reached by the group and the selected edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachMarks {
    num_vertices: usize,
    marks: Vec<bool>,
    counts: Vec<u64>,
}

impl ReachMarks {
    pub fn new(theta: usize, num_vertices: usize) -> Self {
        ReachMarks { num_vertices, marks: vec![false; theta * num_vertices], counts: vec![0; theta] }
    }

    pub fn theta(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn is_marked(&self, k: usize, v: VertexId) -> bool {
        self.marks[k * self.num_vertices + v.index()]
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[bool] {
        &self.marks[k * self.num_vertices..(k + 1) * self.num_vertices]
    }

    /// Marked vertices in sketch `k`.
    pub fn row_count(&self, k: usize) -> u64 {
        self.counts[k]
    }

    /// Marked vertices summed over all sketches.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Marks for `group` alone: row `k` is `reach_set(sketch k, group)`.
pub fn mark_group_reach(ss: &SketchSet, group: &[VertexId]) -> ReachMarks {
    let mut marks = ReachMarks::new(ss.theta(), ss.num_vertices);
    let n = ss.num_vertices;
    marks
        .marks
        .par_chunks_mut(n.max(1))
        .zip(marks.counts.par_iter_mut())
        .zip(ss.sketches.par_iter())
        .for_each_init(
            || Scratch::new(n),
            |scratch, ((row, count), sketch)| {
                bfs(
                    scratch,
                    group.iter().copied(),
                    |u| sketch.neighbors(u).iter().copied(),
                    &BonusEdges::default(),
                    |_| false,
                    |v| {
                        row[v.index()] = true;
                        *count += 1;
                    },
                );
            },
        );
    marks
}

/// Vertices newly reached from `chosen.dst` in one row: BFS over unmarked
/// vertices through sketch edges and the always-live `bonus` edges. The guard
/// requires `chosen.src` marked and `chosen.dst` unmarked.
#[inline]
pub(crate) fn fresh_reach<F: FnMut(VertexId)>(
    sketch: &Sketch,
    row: &[bool],
    bonus: &BonusEdges,
    chosen: Edge,
    scratch: &mut Scratch,
    visit: F,
) {
    if !row[chosen.src.index()] || row[chosen.dst.index()] {
        return;
    }
    bfs(
        scratch,
        [chosen.dst],
        |u| sketch.neighbors(u).iter().copied(),
        bonus,
        |v| row[v.index()],
        visit,
    );
}

/// Number of vertices reconnecting `probe` newly reaches in sketch `k`, given
/// marks maintained for the edges in `bonus`.
#[inline]
pub(crate) fn row_gain(ss: &SketchSet, marks: &ReachMarks, k: usize, bonus: &BonusEdges, probe: Edge, scratch: &mut Scratch) -> u64 {
    let mut n = 0u64;
    fresh_reach(&ss.sketches[k], marks.row(k), bonus, probe, scratch, |_| n += 1);
    n
}

/// Update marks after `chosen` is selected. `selected` holds every selected
/// edge including `chosen`; new marks cascade through any of them whose tail
/// becomes reached. Returns the union over sketches of newly marked vertices,
/// sorted.
pub fn mark_edge_reach(ss: &SketchSet, marks: &mut ReachMarks, selected: &[Edge], chosen: Edge) -> Vec<VertexId> {
    let n = ss.num_vertices;
    let bonus = BonusEdges::new(selected);
    let fresh: Vec<Vec<VertexId>> = marks
        .marks
        .par_chunks_mut(n.max(1))
        .zip(marks.counts.par_iter_mut())
        .zip(ss.sketches.par_iter())
        .map_init(
            || Scratch::new(n),
            |scratch, ((row, count), sketch)| {
                let mut new = Vec::new();
                fresh_reach(sketch, row, &bonus, chosen, scratch, |v| new.push(v));
                for &v in &new {
                    row[v.index()] = true;
                }
                *count += new.len() as u64;
                new
            },
        )
        .collect();
    let mut union: Vec<VertexId> = fresh.into_iter().flatten().collect();
    union.sort_unstable();
    union.dedup();
    union
}
