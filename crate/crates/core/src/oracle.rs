//! Ground-truth influence spread under the independent cascade model.
//!
//! Reconnected ("bonus") edges are always live. Two estimators are provided:
//! Monte-Carlo cascades and exact expectation by enumerating every live/dead
//! world of the probabilistic edges.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Edge, SnapshotGraph, VertexId};
use crate::reach::{bfs, BonusEdges, Scratch};
use crate::rng;

/// Largest number of edges with `p < 1` that [`exact_spread`] will enumerate.
pub const EXACT_EDGE_LIMIT: usize = 20;

/// Seed group plus reconnected edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedSpec {
    pub seeds: Vec<VertexId>,
    pub bonus_edges: Vec<Edge>,
}

impl SeedSpec {
    pub fn new(seeds: Vec<VertexId>, bonus_edges: Vec<Edge>) -> Self {
        SeedSpec { seeds, bonus_edges }
    }

    pub fn seeds(seeds: &[VertexId]) -> Self {
        SeedSpec { seeds: seeds.to_vec(), bonus_edges: Vec::new() }
    }

    fn check(&self, g: &SnapshotGraph) -> Result<()> {
        let n = g.num_vertices();
        if let Some(s) = self.seeds.iter().find(|s| s.index() >= n) {
            return Err(Error::arg(format!("seed {s} outside 0..{n}")));
        }
        if let Some(e) = self.bonus_edges.iter().find(|e| e.src.index() >= n || e.dst.index() >= n) {
            return Err(Error::arg(format!("bonus edge {e} outside 0..{n}")));
        }
        if let Some(e) = self.bonus_edges.iter().find(|&&e| g.contains(e)) {
            return Err(Error::arg(format!("bonus edge {e} is already in the graph")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl SpreadEstimate {
    /// Mean and standard error of integer samples, summed in slice order.
    pub fn from_samples(samples: &[i64]) -> Self {
        let n = samples.len() as f64;
        let sum: i64 = samples.iter().sum();
        let mean = sum as f64 / n;
        let stderr = if samples.len() > 1 {
            let ss: f64 = samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        SpreadEstimate { mean, stderr, trials: samples.len() as u64 }
    }
}

/// RNG for Monte-Carlo trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    rng::stream(seed, rng::DOMAIN_CASCADE, trial)
}

/// Coin for edge index `idx`: a random-access read of the trial stream, so an
/// edge's outcome does not depend on the order edges are attempted in.
#[inline]
fn edge_coin(rng: &mut ChaCha8Rng, idx: usize) -> f64 {
    rng.set_word_pos(2 * idx as u128);
    let bits = rng.next_u64();
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One IC realization. Newly active vertices try their out-edges in rounds,
/// lowest vertex id first; bonus edges always fire. Returns the activated set,
/// sorted.
pub fn simulate_ic(g: &SnapshotGraph, seeding: &SeedSpec, rng: &mut ChaCha8Rng) -> Vec<VertexId> {
    let bonus = BonusEdges::new(&seeding.bonus_edges);
    let mut active = vec![false; g.num_vertices()];
    let mut frontier: Vec<VertexId> = Vec::new();
    for &s in &seeding.seeds {
        if !active[s.index()] {
            active[s.index()] = true;
            frontier.push(s);
        }
    }
    let mut out = frontier.clone();
    while !frontier.is_empty() {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &u in &frontier {
            for idx in g.edge_range(u) {
                let v = g.edge_target(idx);
                if !active[v.index()] && edge_coin(rng, idx) < g.edge_probability(idx) {
                    active[v.index()] = true;
                    next.push(v);
                }
            }
            for v in bonus.out(u) {
                if !active[v.index()] {
                    active[v.index()] = true;
                    next.push(v);
                }
            }
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    out.sort_unstable();
    out
}

/// Monte-Carlo spread with one independent stream per trial.
pub fn mc_spread(g: &SnapshotGraph, seeding: &SeedSpec, trials: u64, seed: u64) -> Result<SpreadEstimate> {
    if trials == 0 {
        return Err(Error::arg("trials must be >= 1"));
    }
    seeding.check(g)?;
    let counts: Vec<i64> = (0..trials)
        .into_par_iter()
        .map(|t| simulate_ic(g, seeding, &mut trial_rng(seed, t)).len() as i64)
        .collect();
    Ok(SpreadEstimate::from_samples(&counts))
}

/// Spread increase from adding `edges` to `group`, estimated with common random
/// numbers: both arms of trial `t` read the same stream. Returns the mean and
/// standard error of the paired differences.
pub fn mc_gain(g: &SnapshotGraph, group: &[VertexId], edges: &[Edge], trials: u64, seed: u64) -> Result<SpreadEstimate> {
    if trials == 0 {
        return Err(Error::arg("trials must be >= 1"));
    }
    let with = SeedSpec::new(group.to_vec(), edges.to_vec());
    let without = SeedSpec::seeds(group);
    with.check(g)?;
    let diffs: Vec<i64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let a = simulate_ic(g, &with, &mut trial_rng(seed, t)).len() as i64;
            let b = simulate_ic(g, &without, &mut trial_rng(seed, t)).len() as i64;
            a - b
        })
        .collect();
    Ok(SpreadEstimate::from_samples(&diffs))
}

/// Exact expected spread by enumerating all `2^m` worlds of the `m` edges with
/// `p < 1`. Edges with `p = 1` and bonus edges are live in every world.
pub fn exact_spread(g: &SnapshotGraph, seeding: &SeedSpec) -> Result<SpreadEstimate> {
    seeding.check(g)?;
    let n = g.num_vertices();
    let mut certain: Vec<Edge> = seeding.bonus_edges.clone();
    let mut uncertain: Vec<(Edge, f64)> = Vec::new();
    for u in 0..n {
        let u = VertexId(u as u32);
        for (v, p) in g.out_edges(u) {
            if p >= 1.0 {
                certain.push(Edge { src: u, dst: v });
            } else {
                uncertain.push((Edge { src: u, dst: v }, p));
            }
        }
    }
    if uncertain.len() > EXACT_EDGE_LIMIT {
        return Err(Error::Capacity { edges: uncertain.len(), limit: EXACT_EDGE_LIMIT });
    }

    let mut scratch = Scratch::new(n);
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    let mut mean = 0.0;
    for world in 0u64..(1u64 << uncertain.len()) {
        adj.iter_mut().for_each(Vec::clear);
        for e in &certain {
            adj[e.src.index()].push(e.dst);
        }
        let mut prob = 1.0;
        for (bit, &(e, p)) in uncertain.iter().enumerate() {
            if world >> bit & 1 == 1 {
                adj[e.src.index()].push(e.dst);
                prob *= p;
            } else {
                prob *= 1.0 - p;
            }
        }
        let mut reached = 0usize;
        bfs(
            &mut scratch,
            seeding.seeds.iter().copied(),
            |u| adj[u.index()].iter().copied(),
            &BonusEdges::default(),
            |_| false,
            |_| reached += 1,
        );
        mean += prob * reached as f64;
    }
    Ok(SpreadEstimate { mean, stderr: 0.0, trials: 0 })
}

/// Deterministic forward closure of `sources` in `g` plus always-live `bonus`.
pub fn reachable(g: &SnapshotGraph, sources: &[VertexId], bonus: &[Edge]) -> Vec<VertexId> {
    let mut scratch = Scratch::new(g.num_vertices());
    let mut out = Vec::new();
    bfs(
        &mut scratch,
        sources.iter().copied(),
        |u| g.neighbors(u).iter().copied(),
        &BonusEdges::new(bonus),
        |_| false,
        |v| out.push(v),
    );
    out.sort_unstable();
    out
}

/// Draws a uniform f64 from a trial stream; exposed for tests that check
/// the coin distribution.
#[doc(hidden)]
pub fn coin_for_edge(seed: u64, trial: u64, idx: usize) -> f64 {
    edge_coin(&mut trial_rng(seed, trial), idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(u32, u32)]) -> SnapshotGraph {
        SnapshotGraph::from_edges(n, edges.iter().map(|&(a, b)| Edge::new(a, b))).unwrap()
    }

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn deterministic_cascade_is_reachability() {
        // chain with in-degree 1 everywhere: p = 1
        let g = graph(5, &[(0, 1), (1, 2), (2, 3)]);
        let seeding = SeedSpec::seeds(&[v(0)]);
        for t in 0..10 {
            assert_eq!(simulate_ic(&g, &seeding, &mut trial_rng(1, t)), vec![v(0), v(1), v(2), v(3)]);
        }
        let est = mc_spread(&g, &seeding, 50, 3).unwrap();
        assert_eq!(est.mean, 4.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn no_edges_activates_only_seeds() {
        let g = graph(4, &[]);
        let seeding = SeedSpec::seeds(&[v(1), v(3)]);
        assert_eq!(simulate_ic(&g, &seeding, &mut trial_rng(0, 0)), vec![v(1), v(3)]);
    }

    #[test]
    fn bonus_edges_always_fire() {
        let g = graph(3, &[(0, 1)]);
        let seeding = SeedSpec::new(vec![v(0)], vec![Edge::new(1, 2)]);
        for t in 0..20 {
            assert_eq!(simulate_ic(&g, &seeding, &mut trial_rng(9, t)).len(), 3);
        }
        let est = mc_spread(&g, &seeding, 100, 1).unwrap();
        assert_eq!((est.mean, est.stderr), (3.0, 0.0));
        assert_eq!(exact_spread(&g, &seeding).unwrap().mean, 3.0);
    }

    #[test]
    fn bonus_edge_already_present_is_rejected() {
        let g = graph(3, &[(0, 1)]);
        let seeding = SeedSpec::new(vec![v(0)], vec![Edge::new(0, 1)]);
        assert!(mc_spread(&g, &seeding, 1, 0).is_err());
        assert!(mc_spread(&g, &SeedSpec::seeds(&[v(0)]), 0, 0).is_err());
    }

    #[test]
    fn single_half_edge_converges() {
        // a->b and c->b make p(a,b) = 0.5
        let g = graph(3, &[(0, 1), (2, 1)]);
        let est = mc_spread(&g, &SeedSpec::seeds(&[v(0)]), 100_000, 42).unwrap();
        assert!((est.mean - 1.5).abs() <= 0.01, "mean {}", est.mean);
        assert_eq!(exact_spread(&g, &SeedSpec::seeds(&[v(0)])).unwrap().mean, 1.5);
    }

    #[test]
    fn exact_star_and_path() {
        // star a->b, a->c with extra in-edges so both have p = 0.5
        let star = graph(5, &[(0, 1), (0, 2), (3, 1), (4, 2)]);
        assert_eq!(exact_spread(&star, &SeedSpec::seeds(&[v(0)])).unwrap().mean, 2.0);
        // path a->b->c, each p = 0.5
        let path = graph(5, &[(0, 1), (1, 2), (3, 1), (4, 2)]);
        assert_eq!(exact_spread(&path, &SeedSpec::seeds(&[v(0)])).unwrap().mean, 1.75);
    }

    #[test]
    fn exact_refuses_large_graphs() {
        let edges: Vec<(u32, u32)> = (0..21).flat_map(|i| [(i, 100), (i, 101)]).collect();
        let g = graph(102, &edges);
        assert!(matches!(
            exact_spread(&g, &SeedSpec::seeds(&[v(0)])),
            Err(Error::Capacity { edges: 42, limit: EXACT_EDGE_LIMIT })
        ));
    }

    #[test]
    fn mc_is_deterministic_for_fixed_seed() {
        let g = graph(6, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)]);
        let seeding = SeedSpec::seeds(&[v(0)]);
        let a = mc_spread(&g, &seeding, 2000, 7).unwrap();
        let b = mc_spread(&g, &seeding, 2000, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn paired_gain_of_nothing_is_zero() {
        let g = graph(4, &[(0, 1), (2, 1), (1, 3)]);
        let est = mc_gain(&g, &[v(0)], &[], 500, 5).unwrap();
        assert_eq!((est.mean, est.stderr), (0.0, 0.0));
    }

    #[test]
    fn coins_are_uniform_ish() {
        let n = 20_000;
        let mean: f64 = (0..n).map(|t| coin_for_edge(3, t, 5)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01);
    }
}
