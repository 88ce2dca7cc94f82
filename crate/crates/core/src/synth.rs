//! Synthetic temporal graphs with preferential-attachment structure.

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeList, TemporalEdge, VertexId};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct PaConfig {
    pub num_vertices: usize,
    /// Edges each arriving vertex attaches.
    pub edges_per_vertex: usize,
    /// Probability that an attachment is also mirrored in the opposite direction.
    pub reciprocity: f64,
    /// Timestamps are drawn from `0..horizon`.
    pub horizon: i64,
    /// Mean number of timestamped interactions per relationship.
    pub interactions: usize,
    pub seed: u64,
}

impl Default for PaConfig {
    fn default() -> Self {
        PaConfig {
            num_vertices: 10_000,
            edges_per_vertex: 3,
            reciprocity: 0.3,
            horizon: 1_000,
            interactions: 3,
            seed: 1,
        }
    }
}

/// Generate a temporal edge list. Vertex `i` arrives at time
/// `i / n * horizon / 2` and attaches to earlier vertices chosen proportionally
/// to degree. Every relationship is active over a random interval starting at
/// its creation and emits a few interactions inside it, so relationships fade
/// in and out across snapshots.
pub fn preferential_attachment(cfg: &PaConfig) -> Result<EdgeList> {
    let n = cfg.num_vertices;
    let m = cfg.edges_per_vertex;
    if n < m + 1 || m == 0 {
        return Err(Error::arg("need edges_per_vertex >= 1 and num_vertices > edges_per_vertex"));
    }
    if cfg.horizon < 1 || cfg.interactions == 0 {
        return Err(Error::arg("horizon and interactions must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.reciprocity) {
        return Err(Error::arg("reciprocity outside [0, 1]"));
    }
    let mut rng = rng::stream(cfg.seed, rng::DOMAIN_SYNTH, 0);
    let horizon = cfg.horizon;
    let mut endpoints: Vec<u32> = (0..=m as u32).collect();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for a in 0..=m as u32 {
        for b in 0..=m as u32 {
            if a != b && rng.gen_bool(0.5) {
                pairs.push((a, b));
            }
        }
    }
    for i in (m + 1)..n {
        let i = i as u32;
        let mut targets: Vec<u32> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            pairs.push((i, t));
            if rng.gen_bool(cfg.reciprocity) {
                pairs.push((t, i));
            }
            endpoints.push(t);
            endpoints.push(i);
        }
    }

    let mut edges = Vec::new();
    for &(a, b) in &pairs {
        let arrival = a.max(b) as i64 * horizon / (2 * n as i64);
        let span = rng.gen_range(1..=horizon - arrival);
        let end = (arrival + span).min(horizon);
        let k = rng.gen_range(1..=2 * cfg.interactions - 1);
        for _ in 0..k {
            let ts = rng.gen_range(arrival..end.max(arrival + 1));
            edges.push(TemporalEdge { src: VertexId(a), dst: VertexId(b), ts });
        }
    }
    edges.sort_by_key(|e| (e.ts, e.src, e.dst));
    Ok(EdgeList { edges, labels: (0..n).map(|i| i.to_string()).collect(), self_loops_dropped: 0 })
}

/// Write `src dst ts` lines using raw labels.
pub fn write_temporal_edges<W: Write>(list: &EdgeList, mut w: W) -> Result<()> {
    for e in &list.edges {
        writeln!(w, "{} {} {}", list.labels[e.src.index()], list.labels[e.dst.index()], e.ts)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{load_temporal_edges, partition_snapshots};

    #[test]
    fn generates_reproducible_graph() {
        let cfg = PaConfig { num_vertices: 300, seed: 4, ..PaConfig::default() };
        let a = preferential_attachment(&cfg).unwrap();
        let b = preferential_attachment(&cfg).unwrap();
        assert_eq!(a.edges, b.edges);
        assert!(a.edges.iter().all(|e| e.src != e.dst && (0..cfg.horizon).contains(&e.ts)));
        let c = preferential_attachment(&PaConfig { seed: 5, ..cfg }).unwrap();
        assert_ne!(a.edges, c.edges);
    }

    #[test]
    fn written_list_reloads() {
        let cfg = PaConfig { num_vertices: 50, ..PaConfig::default() };
        let list = preferential_attachment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_temporal_edges(&list, &mut buf).unwrap();
        let back = load_temporal_edges(buf.as_slice()).unwrap();
        assert_eq!(back.edges.len(), list.edges.len());
        let g = partition_snapshots(&back, 10).unwrap();
        assert_eq!(g.num_snapshots(), 10);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(preferential_attachment(&PaConfig { num_vertices: 3, ..PaConfig::default() }).is_err());
        assert!(preferential_attachment(&PaConfig { reciprocity: 2.0, ..PaConfig::default() }).is_err());
    }
}
