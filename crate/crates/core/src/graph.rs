//! Evolving directed graphs: temporal edge-list ingestion, equal-width
//! snapshot partitioning and 1/in-degree propagation probabilities.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense vertex index, `0..num_vertices`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A directed edge `src -> dst`. Ordering is lexicographic on `(src, dst)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
}

impl Edge {
    pub fn new(src: u32, dst: u32) -> Self {
        Edge { src: VertexId(src), dst: VertexId(dst) }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.dst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemporalEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub ts: i64,
}

/// Parsed temporal edge list with its label table.
#[derive(Clone, Debug, Default)]
pub struct EdgeList {
    pub edges: Vec<TemporalEdge>,
    /// Raw label of each vertex, indexed by `VertexId`.
    pub labels: Vec<String>,
    pub self_loops_dropped: usize,
}

impl EdgeList {
    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }
}

/// Parse a SNAP-style temporal edge list: one `src dst ts` per line,
/// separated by whitespace and/or commas. Lines starting with `#` or `%`
/// are comments. Labels are remapped densely in order of first appearance.
pub fn load_temporal_edges<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut out = EdgeList::default();
    let mut index: HashMap<String, VertexId> = HashMap::new();
    let mut intern = |label: &str, labels: &mut Vec<String>| -> VertexId {
        if let Some(&id) = index.get(label) {
            return id;
        }
        let id = VertexId(labels.len() as u32);
        labels.push(label.to_owned());
        index.insert(label.to_owned(), id);
        id
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected `src dst ts`, found {} field(s)", fields.len()),
            });
        }
        let ts: i64 = fields[2].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("timestamp {:?} is not an integer", fields[2]),
        })?;
        let src = intern(fields[0], &mut out.labels);
        let dst = intern(fields[1], &mut out.labels);
        if src == dst {
            out.self_loops_dropped += 1;
            continue;
        }
        out.edges.push(TemporalEdge { src, dst, ts });
    }

    if out.edges.is_empty() {
        return Err(Error::Empty);
    }
    Ok(out)
}

/// Directed graph over a fixed vertex universe with IC edge probabilities
/// `p(u, v) = 1 / in_degree(v)`.
///
/// Out-adjacency is stored in CSR form with each row sorted by destination;
/// the position of an edge in that layout is its edge index.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    probs: Vec<f64>,
    in_degree: Vec<u32>,
}

impl SnapshotGraph {
    /// Build from an arbitrary edge iterator. Duplicates collapse to one edge;
    /// self-loops are dropped.
    pub fn from_edges<I>(num_vertices: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut list: Vec<Edge> = Vec::new();
        for e in edges {
            if e.src.index() >= num_vertices || e.dst.index() >= num_vertices {
                return Err(Error::arg(format!(
                    "edge {e} references a vertex outside 0..{num_vertices}"
                )));
            }
            if e.src != e.dst {
                list.push(e);
            }
        }
        list.sort_unstable();
        list.dedup();

        let mut offsets = vec![0usize; num_vertices + 1];
        let mut in_degree = vec![0u32; num_vertices];
        for e in &list {
            offsets[e.src.index() + 1] += 1;
            in_degree[e.dst.index()] += 1;
        }
        for i in 0..num_vertices {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<VertexId> = list.iter().map(|e| e.dst).collect();
        let probs = targets.iter().map(|v| 1.0 / in_degree[v.index()] as f64).collect();
        Ok(SnapshotGraph { offsets, targets, probs, in_degree })
    }

    pub fn empty(num_vertices: usize) -> Self {
        SnapshotGraph {
            offsets: vec![0; num_vertices + 1],
            targets: Vec::new(),
            probs: Vec::new(),
            in_degree: vec![0; num_vertices],
        }
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.in_degree.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }

    /// Out-edges of `v` as `(dst, probability)`.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        let range = self.offsets[v.index()]..self.offsets[v.index() + 1];
        self.targets[range.clone()].iter().copied().zip(self.probs[range].iter().copied())
    }

    /// Range of edge indices leaving `v`.
    #[inline]
    pub fn edge_range(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v.index()]..self.offsets[v.index() + 1]
    }

    #[inline]
    pub fn edge_target(&self, idx: usize) -> VertexId {
        self.targets[idx]
    }

    #[inline]
    pub fn edge_probability(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> u32 {
        self.in_degree[v.index()]
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.offsets[v.index() + 1] - self.offsets[v.index()]
    }

    /// Edge index of `e`, if present.
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        if e.src.index() >= self.num_vertices() {
            return None;
        }
        let base = self.offsets[e.src.index()];
        self.neighbors(e.src).binary_search(&e.dst).ok().map(|i| base + i)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edge_index(e).is_some()
    }

    /// `1 / in_degree(dst)` for an edge present in this snapshot.
    pub fn propagation_probability(&self, e: Edge) -> Result<f64> {
        self.edge_index(e)
            .map(|i| self.probs[i])
            .ok_or(Error::MissingEdge { src: e.src.0, dst: e.dst.0 })
    }

    /// All edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.num_vertices()).flat_map(move |u| {
            let src = VertexId(u as u32);
            self.neighbors(src).iter().map(move |&dst| Edge { src, dst })
        })
    }
}

/// A sequence of snapshots over a shared vertex universe.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolvingGraph {
    labels: Vec<String>,
    index: HashMap<String, VertexId>,
    snapshots: Vec<SnapshotGraph>,
    min_ts: i64,
    max_ts: i64,
}

const SERIAL_MAGIC: &str = "rtlr-evolving";
const SERIAL_VERSION: u32 = 1;

impl EvolvingGraph {
    pub fn new(labels: Vec<String>, snapshots: Vec<SnapshotGraph>, min_ts: i64, max_ts: i64) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::arg("an evolving graph needs at least one snapshot"));
        }
        if let Some(bad) = snapshots.iter().position(|s| s.num_vertices() != labels.len()) {
            return Err(Error::arg(format!(
                "snapshot {bad} has {} vertices, expected {}",
                snapshots[bad].num_vertices(),
                labels.len()
            )));
        }
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i as u32)))
            .collect();
        Ok(EvolvingGraph { labels, index, snapshots, min_ts, max_ts })
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_snapshots(&self) -> usize {
        self.snapshots.len()
    }

    pub fn snapshots(&self) -> &[SnapshotGraph] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &SnapshotGraph {
        &self.snapshots[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.index()]
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<VertexId> {
        self.vertex(label).ok_or_else(|| Error::UnknownVertex(label.to_owned()))
    }

    pub fn time_range(&self) -> (i64, i64) {
        (self.min_ts, self.max_ts)
    }

    /// Write the versioned line-based form read back by [`EvolvingGraph::read_from`].
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SERIAL_MAGIC} {SERIAL_VERSION}")?;
        writeln!(
            w,
            "vertices {} snapshots {} time {} {}",
            self.num_vertices(),
            self.num_snapshots(),
            self.min_ts,
            self.max_ts
        )?;
        for label in &self.labels {
            writeln!(w, "{label}")?;
        }
        for (i, s) in self.snapshots.iter().enumerate() {
            writeln!(w, "snapshot {i} {}", s.num_edges())?;
            for e in s.edges() {
                writeln!(w, "{} {}", e.src, e.dst)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Format(format!("unexpected end of input, expected {what}")))
        };
        let bad = |msg: String| Error::Format(msg);

        let header = next("header")?;
        let mut h = header.split_whitespace();
        if h.next() != Some(SERIAL_MAGIC) {
            return Err(bad(format!("not an evolving-graph file: {header:?}")));
        }
        match h.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(SERIAL_VERSION) => {}
            other => return Err(bad(format!("unsupported version {other:?}"))),
        }

        let dims = next("dimensions")?;
        let f: Vec<&str> = dims.split_whitespace().collect();
        if f.len() != 7 || f[0] != "vertices" || f[2] != "snapshots" || f[4] != "time" {
            return Err(bad(format!("bad dimension line {dims:?}")));
        }
        let num = |s: &str| s.parse::<i64>().map_err(|_| bad(format!("bad number {s:?}")));
        let n = num(f[1])? as usize;
        let t = num(f[3])? as usize;
        let (min_ts, max_ts) = (num(f[5])?, num(f[6])?);

        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(next("vertex label")?);
        }
        let mut snapshots = Vec::with_capacity(t);
        for i in 0..t {
            let head = next("snapshot header")?;
            let f: Vec<&str> = head.split_whitespace().collect();
            if f.len() != 3 || f[0] != "snapshot" || num(f[1])? as usize != i {
                return Err(bad(format!("bad snapshot header {head:?}")));
            }
            let m = num(f[2])? as usize;
            let mut edges = Vec::with_capacity(m);
            for _ in 0..m {
                let line = next("edge")?;
                let mut it = line.split_whitespace();
                let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                    return Err(bad(format!("bad edge line {line:?}")));
                };
                edges.push(Edge::new(num(a)? as u32, num(b)? as u32));
            }
            snapshots.push(SnapshotGraph::from_edges(n, edges)?);
        }
        EvolvingGraph::new(labels, snapshots, min_ts, max_ts)
    }
}

/// Window index of `ts` when `[min_ts, max_ts]` is cut into `t` equal-width
/// half-open windows, the last one closed on the right.
pub fn window_of(ts: i64, min_ts: i64, max_ts: i64, t: usize) -> usize {
    let span = max_ts as i128 - min_ts as i128;
    if span <= 0 {
        return 0;
    }
    let w = ((ts as i128 - min_ts as i128) * t as i128).div_euclid(span);
    w.clamp(0, t as i128 - 1) as usize
}

/// Split temporal edges into `t` snapshots sharing the edge list's vertex universe.
pub fn partition_snapshots(list: &EdgeList, t: usize) -> Result<EvolvingGraph> {
    if t == 0 {
        return Err(Error::arg("snapshot count must be at least 1"));
    }
    if list.edges.is_empty() {
        return Err(Error::Empty);
    }
    let min_ts = list.edges.iter().map(|e| e.ts).min().unwrap();
    let max_ts = list.edges.iter().map(|e| e.ts).max().unwrap();
    let mut buckets: Vec<Vec<Edge>> = vec![Vec::new(); t];
    for e in &list.edges {
        buckets[window_of(e.ts, min_ts, max_ts, t)].push(Edge { src: e.src, dst: e.dst });
    }
    let n = list.num_vertices();
    let snapshots = buckets
        .into_iter()
        .map(|b| SnapshotGraph::from_edges(n, b))
        .collect::<Result<Vec<_>>>()?;
    EvolvingGraph::new(list.labels.clone(), snapshots, min_ts, max_ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<EdgeList> {
        load_temporal_edges(s.as_bytes())
    }

    #[test]
    fn parses_simple_list() {
        let l = parse("1 2 100\n2 3 110").unwrap();
        assert_eq!(l.num_vertices(), 3);
        let got: Vec<_> = l.edges.iter().map(|e| (e.src.0, e.dst.0, e.ts)).collect();
        assert_eq!(got, vec![(0, 1, 100), (1, 2, 110)]);
    }

    #[test]
    fn comments_commas_and_blank_lines() {
        let l = parse("# header\n\n1,2,5\n% konect\n2\t3  7\n").unwrap();
        assert_eq!(l.edges.len(), 2);
        assert_eq!(l.edges[1].ts, 7);
    }

    #[test]
    fn missing_timestamp_is_a_parse_error() {
        match parse("a b") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error at line 1, got {other:?}"),
        }
        match parse("1 2 3\n# c\n4 5 x") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("expected parse error at line 3, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse(""), Err(Error::Empty)));
        assert!(matches!(parse("# only comments\n"), Err(Error::Empty)));
    }

    #[test]
    fn self_loops_are_dropped_and_counted() {
        let l = parse("5 5 10\n5 6 11").unwrap();
        assert_eq!(l.self_loops_dropped, 1);
        assert_eq!(l.edges, vec![TemporalEdge { src: VertexId(0), dst: VertexId(1), ts: 11 }]);
    }

    fn list_with_timestamps(ts: &[i64]) -> EdgeList {
        let text: String = ts.iter().enumerate().map(|(i, t)| format!("{} {} {t}\n", i, i + 1)).collect();
        parse(&text).unwrap()
    }

    #[test]
    fn equal_width_windows() {
        assert_eq!(window_of(9, 0, 99, 10), 0);
        assert_eq!(window_of(10, 0, 99, 10), 1);
        assert_eq!(window_of(99, 0, 99, 10), 9);
        assert_eq!(window_of(0, 0, 99, 10), 0);
        assert_eq!(window_of(5, 5, 5, 3), 0);
    }

    #[test]
    fn partition_places_edges_by_window() {
        let ts: Vec<i64> = (0..100).collect();
        let g = partition_snapshots(&list_with_timestamps(&ts), 10).unwrap();
        assert_eq!(g.num_snapshots(), 10);
        for s in g.snapshots() {
            assert_eq!(s.num_edges(), 10);
        }
        assert!(g.snapshot(0).contains(Edge::new(9, 10)));
        assert!(g.snapshot(1).contains(Edge::new(10, 11)));
        assert!(g.snapshot(9).contains(Edge::new(99, 100)));
    }

    #[test]
    fn degenerate_time_range_goes_to_first_snapshot() {
        let g = partition_snapshots(&list_with_timestamps(&[4, 4, 4]), 3).unwrap();
        assert_eq!(g.snapshot(0).num_edges(), 3);
        assert_eq!(g.snapshot(1).num_edges(), 0);
        assert_eq!(g.snapshot(2).num_edges(), 0);
        assert_eq!(g.snapshot(2).num_vertices(), 4);
    }

    #[test]
    fn zero_snapshots_rejected() {
        assert!(matches!(
            partition_snapshots(&list_with_timestamps(&[1]), 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn probabilities_are_inverse_in_degree() {
        let g = SnapshotGraph::from_edges(
            6,
            [Edge::new(0, 4), Edge::new(1, 4), Edge::new(2, 4), Edge::new(3, 4), Edge::new(4, 5), Edge::new(0, 1), Edge::new(2, 1)],
        )
        .unwrap();
        assert_eq!(g.propagation_probability(Edge::new(0, 4)).unwrap(), 0.25);
        assert_eq!(g.propagation_probability(Edge::new(4, 5)).unwrap(), 1.0);
        assert_eq!(g.propagation_probability(Edge::new(0, 1)).unwrap(), 0.5);
        assert_eq!(g.propagation_probability(Edge::new(2, 1)).unwrap(), 0.5);
        assert!(matches!(
            g.propagation_probability(Edge::new(5, 4)),
            Err(Error::MissingEdge { src: 5, dst: 4 })
        ));
    }

    #[test]
    fn duplicates_collapse() {
        let g = SnapshotGraph::from_edges(3, [Edge::new(0, 1), Edge::new(0, 1), Edge::new(2, 1)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.in_degree(VertexId(1)), 2);
    }

    #[test]
    fn serialization_round_trips() {
        let l = parse("a b 1\nb c 5\nc a 9\nd a 9\na b 3\n").unwrap();
        let g = partition_snapshots(&l, 3).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let back = EvolvingGraph::read_from(buf.as_slice()).unwrap();
        assert_eq!(g, back);
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_foreign_serialization() {
        assert!(matches!(EvolvingGraph::read_from("hello 1\n".as_bytes()), Err(Error::Format(_))));
        assert!(matches!(EvolvingGraph::read_from("rtlr-evolving 9\n".as_bytes()), Err(Error::Format(_))));
    }
}
