//! Traversal scratch space shared by every reachability routine.

use crate::graph::{Edge, VertexId};

/// Epoch-stamped visited set; `reset` is O(1) amortized.
#[derive(Clone, Debug)]
pub struct Marker {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Marker {
    pub fn new(n: usize) -> Self {
        Marker { stamp: vec![0; n], epoch: 1 }
    }

    pub fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Returns true if `v` was not yet marked.
    #[inline]
    pub fn mark(&mut self, v: VertexId) -> bool {
        let s = &mut self.stamp[v.index()];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }

    #[inline]
    pub fn is_marked(&self, v: VertexId) -> bool {
        self.stamp[v.index()] == self.epoch
    }
}

/// Reusable BFS state.
#[derive(Clone, Debug)]
pub struct Scratch {
    pub seen: Marker,
    pub queue: Vec<VertexId>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch { seen: Marker::new(n), queue: Vec::new() }
    }
}

/// Always-live edges added on top of a graph, grouped by tail.
#[derive(Clone, Debug, Default)]
pub struct BonusEdges {
    edges: Vec<Edge>,
}

impl BonusEdges {
    pub fn new(edges: &[Edge]) -> Self {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        BonusEdges { edges }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    #[inline]
    pub fn out(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let lo = self.edges.partition_point(|e| e.src < v);
        self.edges[lo..].iter().take_while(move |e| e.src == v).map(|e| e.dst)
    }
}

/// Forward BFS from `sources` over `neighbors` plus `bonus`. Every vertex reached
/// (sources included) is marked in `scratch.seen` and passed to `visit`.
/// Vertices for which `blocked` returns true are neither entered nor reported.
pub fn bfs<'a, N, I, B, F>(
    scratch: &mut Scratch,
    sources: impl IntoIterator<Item = VertexId>,
    neighbors: N,
    bonus: &BonusEdges,
    blocked: B,
    mut visit: F,
) where
    N: Fn(VertexId) -> I,
    I: Iterator<Item = VertexId> + 'a,
    B: Fn(VertexId) -> bool,
    F: FnMut(VertexId),
{
    scratch.seen.reset();
    scratch.queue.clear();
    for s in sources {
        if !blocked(s) && scratch.seen.mark(s) {
            scratch.queue.push(s);
            visit(s);
        }
    }
    let mut head = 0;
    while head < scratch.queue.len() {
        let u = scratch.queue[head];
        head += 1;
        for v in neighbors(u).chain(bonus.out(u)) {
            if !blocked(v) && scratch.seen.mark(v) {
                scratch.queue.push(v);
                visit(v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_reset_forgets() {
        let mut m = Marker::new(3);
        assert!(m.mark(VertexId(1)));
        assert!(!m.mark(VertexId(1)));
        m.reset();
        assert!(!m.is_marked(VertexId(1)));
        assert!(m.mark(VertexId(1)));
    }

    #[test]
    fn bonus_edges_grouped_by_tail() {
        let b = BonusEdges::new(&[Edge::new(2, 0), Edge::new(1, 3), Edge::new(2, 1), Edge::new(1, 3)]);
        assert_eq!(b.out(VertexId(2)).collect::<Vec<_>>(), vec![VertexId(0), VertexId(1)]);
        assert_eq!(b.out(VertexId(1)).count(), 1);
        assert_eq!(b.out(VertexId(0)).count(), 0);
    }

    #[test]
    fn bfs_respects_blocked_vertices() {
        let adj: Vec<Vec<VertexId>> = vec![vec![VertexId(1)], vec![VertexId(2)], vec![]];
        let mut s = Scratch::new(3);
        let mut seen = Vec::new();
        bfs(
            &mut s,
            [VertexId(0)],
            |u| adj[u.index()].iter().copied(),
            &BonusEdges::default(),
            |v| v == VertexId(1),
            |v| seen.push(v),
        );
        assert_eq!(seen, vec![VertexId(0)]);
    }
}
