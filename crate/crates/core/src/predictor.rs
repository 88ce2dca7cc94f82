//! Heuristic next-snapshot predictors and the candidate edge set they induce.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Edge, EvolvingGraph, SnapshotGraph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PredictorKind {
    /// The last observed snapshot.
    PersistenceLast,
    /// Edges present in at least `ceil(k / 2)` of the last `k` snapshots.
    PersistenceUnion { k: usize },
    /// Edges whose appearance frequency over all snapshots is at least `tau`.
    ScoreThreshold { tau: f64 },
}

impl PredictorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PredictorKind::PersistenceUnion { k: 0 } => Err(Error::arg("union window k must be >= 1")),
            PredictorKind::ScoreThreshold { tau } if !(tau > 0.0 && tau <= 1.0) => {
                Err(Error::arg(format!("threshold {tau} outside (0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictorKind::PersistenceLast => f.write_str("persistence"),
            PredictorKind::PersistenceUnion { k } => write!(f, "union:{k}"),
            PredictorKind::ScoreThreshold { tau } => write!(f, "threshold:{tau}"),
        }
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    /// Accepts `persistence`, `union:<k>` or `threshold:<tau>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let kind = match (name, arg) {
            ("persistence", None) => PredictorKind::PersistenceLast,
            ("union", Some(a)) => PredictorKind::PersistenceUnion {
                k: a.parse().map_err(|_| Error::arg(format!("bad union window {a:?}")))?,
            },
            ("threshold", Some(a)) => PredictorKind::ScoreThreshold {
                tau: a.parse().map_err(|_| Error::arg(format!("bad threshold {a:?}")))?,
            },
            _ => return Err(Error::arg(format!("unknown predictor {s:?}"))),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Predict `G_t`. Probabilities are recomputed on the predicted graph.
pub fn predict_next_snapshot(g: &EvolvingGraph, kind: PredictorKind) -> Result<SnapshotGraph> {
    kind.validate()?;
    let t = g.num_snapshots();
    let n = g.num_vertices();
    match kind {
        PredictorKind::PersistenceLast => Ok(g.snapshot(t - 1).clone()),
        PredictorKind::PersistenceUnion { k } => {
            if k > t {
                return Err(Error::arg(format!("union window {k} exceeds the {t} available snapshots")));
            }
            let need = k.div_ceil(2);
            let counts = appearance_counts(&g.snapshots()[t - k..]);
            SnapshotGraph::from_edges(n, counts.into_iter().filter(|&(_, c)| c >= need).map(|(e, _)| e))
        }
        PredictorKind::ScoreThreshold { tau } => {
            if t < 2 {
                return Err(Error::arg("threshold predictor needs at least 2 snapshots"));
            }
            let counts = appearance_counts(g.snapshots());
            SnapshotGraph::from_edges(
                n,
                counts.into_iter().filter(|&(_, c)| c as f64 / t as f64 >= tau).map(|(e, _)| e),
            )
        }
    }
}

fn appearance_counts(snapshots: &[SnapshotGraph]) -> HashMap<Edge, usize> {
    let mut counts = HashMap::new();
    for s in snapshots {
        for e in s.edges() {
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    counts
}

/// Read `G_t` directly from an edge list of raw labels (`src dst [ts]` per line).
pub fn load_predicted_snapshot<R: BufRead>(reader: R, g: &EvolvingGraph) -> Result<SnapshotGraph> {
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let mut f = trimmed.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty());
        let (Some(a), Some(b)) = (f.next(), f.next()) else {
            return Err(Error::Parse { line: lineno + 1, msg: "expected `src dst`".into() });
        };
        edges.push(Edge { src: g.resolve(a)?, dst: g.resolve(b)? });
    }
    SnapshotGraph::from_edges(g.num_vertices(), edges)
}

/// Candidate edges: historical edges absent from `G_t`, sorted by `(src, dst)`.
/// An edge's position in the set is its candidate id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateEdgeSet {
    edges: Vec<Edge>,
}

impl CandidateEdgeSet {
    pub fn new(mut edges: Vec<Edge>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        CandidateEdgeSet { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn get(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn id_of(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.id_of(e).is_some()
    }
}

/// `{ e : e in some snapshot of g } \ edges(gt)`.
pub fn candidate_edges(g: &EvolvingGraph, gt: &SnapshotGraph) -> Result<CandidateEdgeSet> {
    if gt.num_vertices() != g.num_vertices() {
        return Err(Error::arg(format!(
            "predicted snapshot has {} vertices, evolving graph has {}",
            gt.num_vertices(),
            g.num_vertices()
        )));
    }
    let union: BTreeSet<Edge> = g.snapshots().iter().flat_map(|s| s.edges()).collect();
    Ok(CandidateEdgeSet { edges: union.into_iter().filter(|&e| !gt.contains(e)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evolving(n: usize, snaps: &[&[(u32, u32)]]) -> EvolvingGraph {
        let labels = (0..n).map(|i| format!("v{i}")).collect();
        let snapshots = snaps
            .iter()
            .map(|s| SnapshotGraph::from_edges(n, s.iter().map(|&(a, b)| Edge::new(a, b))).unwrap())
            .collect();
        EvolvingGraph::new(labels, snapshots, 0, snaps.len() as i64).unwrap()
    }

    #[test]
    fn parses_predictor_names() {
        assert_eq!("persistence".parse::<PredictorKind>().unwrap(), PredictorKind::PersistenceLast);
        assert_eq!("union:4".parse::<PredictorKind>().unwrap(), PredictorKind::PersistenceUnion { k: 4 });
        assert_eq!(
            "threshold:0.25".parse::<PredictorKind>().unwrap(),
            PredictorKind::ScoreThreshold { tau: 0.25 }
        );
        assert!("union:0".parse::<PredictorKind>().is_err());
        assert!("threshold:1.5".parse::<PredictorKind>().is_err());
        assert!("threshold:0".parse::<PredictorKind>().is_err());
        assert!("seal".parse::<PredictorKind>().is_err());
    }

    #[test]
    fn persistence_returns_last_snapshot() {
        let g = evolving(3, &[&[(0, 1)], &[(1, 2), (0, 2)]]);
        assert_eq!(predict_next_snapshot(&g, PredictorKind::PersistenceLast).unwrap(), *g.snapshot(1));
    }

    #[test]
    fn union_keeps_majority_edges() {
        let e = &[(0u32, 1u32)][..];
        let none = &[][..];
        let g = evolving(2, &[none, e, none, e, e]);
        let gt = predict_next_snapshot(&g, PredictorKind::PersistenceUnion { k: 4 }).unwrap();
        assert!(gt.contains(Edge::new(0, 1)));
        let g = evolving(2, &[e, e, none, none, none, e]);
        let gt = predict_next_snapshot(&g, PredictorKind::PersistenceUnion { k: 4 }).unwrap();
        assert!(!gt.contains(Edge::new(0, 1)));
        assert!(predict_next_snapshot(&g, PredictorKind::PersistenceUnion { k: 7 }).is_err());
    }

    #[test]
    fn threshold_uses_frequency_over_all_snapshots() {
        let e = &[(0u32, 1u32)][..];
        let none = &[][..];
        let mut snaps = vec![none; 10];
        snaps[2] = e;
        snaps[7] = e;
        let g = evolving(2, &snaps);
        let kept = predict_next_snapshot(&g, PredictorKind::ScoreThreshold { tau: 0.2 }).unwrap();
        assert!(kept.contains(Edge::new(0, 1)));
        let dropped = predict_next_snapshot(&g, PredictorKind::ScoreThreshold { tau: 0.25 }).unwrap();
        assert!(!dropped.contains(Edge::new(0, 1)));
        let single = evolving(2, &[e]);
        assert!(predict_next_snapshot(&single, PredictorKind::ScoreThreshold { tau: 0.5 }).is_err());
    }

    #[test]
    fn candidates_are_set_difference() {
        let g = evolving(3, &[&[(0, 1)], &[(1, 2)]]);
        let gt = SnapshotGraph::from_edges(3, [Edge::new(1, 2)]).unwrap();
        assert_eq!(candidate_edges(&g, &gt).unwrap().edges(), &[Edge::new(0, 1)]);
        let all = SnapshotGraph::from_edges(3, [Edge::new(1, 2), Edge::new(0, 1)]).unwrap();
        assert!(candidate_edges(&g, &all).unwrap().is_empty());
    }

    #[test]
    fn predicted_snapshot_from_labels() {
        let g = evolving(3, &[&[(0, 1)], &[(1, 2)]]);
        let gt = load_predicted_snapshot("v0 v1\n# c\nv1,v2,17\n".as_bytes(), &g).unwrap();
        assert_eq!(gt.num_edges(), 2);
        assert!(matches!(
            load_predicted_snapshot("v0 zzz\n".as_bytes(), &g),
            Err(Error::UnknownVertex(l)) if l == "zzz"
        ));
    }
}
