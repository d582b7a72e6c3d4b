//! Short cycles through edges, their ids and preferred orientations.
//!
//! A cycle is named by the lexicographically least rotation of its edge
//! label sequence over both directions. Its preferred orientation sends the
//! least-labelled edge from its lower-labelled endpoint to the higher one and
//! continues around the cycle.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

/// Which total order on cycles picks "the smallest short cycle" of an edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleOrder {
    /// Shorter cycles first, then by id. Needs only shortest cycles.
    #[default]
    ShortestFirst,
    /// By id alone. Enumerates every short cycle through each edge.
    Lexicographic,
}

/// Node and edge labels of a graph that is a piece of a larger one.
#[derive(Clone, Copy, Debug, Default)]
pub struct Labels<'a> {
    pub node: Option<&'a [usize]>,
    pub edge: Option<&'a [usize]>,
}

impl Labels<'_> {
    #[inline]
    pub fn node(&self, v: NodeId) -> usize {
        self.node.map_or(v, |l| l[v])
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> usize {
        self.edge.map_or(e, |l| l[e])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycleKey {
    order: CycleOrder,
    /// Canonical edge label sequence.
    pub id: Vec<usize>,
}

impl Ord for CycleKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.order {
            CycleOrder::ShortestFirst => (self.id.len(), &self.id).cmp(&(other.id.len(), &other.id)),
            CycleOrder::Lexicographic => self.id.cmp(&other.id),
        }
    }
}

impl PartialOrd for CycleKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The chosen cycle of one edge and the tail that cycle gives the edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCycle {
    pub key: CycleKey,
    pub tail: NodeId,
}

/// A closed walk `nodes[i] -e[i]- nodes[i+1]`, indices mod length.
struct Cycle<'a> {
    nodes: &'a [NodeId],
    edges: &'a [EdgeId],
}

impl Cycle<'_> {
    fn key(&self, labels: &Labels<'_>, order: CycleOrder) -> CycleKey {
        let k = self.edges.len();
        let seq: Vec<usize> = self.edges.iter().map(|&e| labels.edge(e)).collect();
        let j = (0..k).min_by_key(|&i| seq[i]).unwrap();
        let forward = seq[(j + 1) % k];
        let backward = seq[(j + k - 1) % k];
        let id = if forward <= backward {
            (0..k).map(|i| seq[(j + i) % k]).collect()
        } else {
            (0..k).map(|i| seq[(j + k - i) % k]).collect()
        };
        CycleKey { order, id }
    }

    /// Tail of `edges[pos]` under the preferred orientation.
    fn tail_at(&self, labels: &Labels<'_>, pos: usize) -> NodeId {
        let k = self.edges.len();
        let j = (0..k).min_by_key(|&i| labels.edge(self.edges[i])).unwrap();
        let along = labels.node(self.nodes[j]) < labels.node(self.nodes[(j + 1) % k]);
        if along {
            self.nodes[pos]
        } else {
            self.nodes[(pos + 1) % k]
        }
    }
}

/// For every full edge, the least cycle of length at most `max_len` through
/// it (under `order`), or `None` if the edge is on no such cycle.
pub fn min_short_cycles(
    g: &Graph,
    max_len: usize,
    order: CycleOrder,
    labels: &Labels<'_>,
) -> Result<Vec<Option<EdgeCycle>>> {
    let all: Vec<EdgeId> = (0..g.m()).collect();
    min_short_cycles_on(g, &all, max_len, order, labels)
}

/// As [`min_short_cycles`], for the listed edges only.
pub fn min_short_cycles_on(
    g: &Graph,
    edges: &[EdgeId],
    max_len: usize,
    order: CycleOrder,
    labels: &Labels<'_>,
) -> Result<Vec<Option<EdgeCycle>>> {
    let mut search = Search::new(g);
    let mut out = Vec::with_capacity(edges.len());
    for &e in edges {
        let found = match (g.full_endpoints(e), order) {
            (None, _) => None,
            (Some(_), _) if max_len < 2 => None,
            (Some((a, b)), CycleOrder::ShortestFirst) => search.shortest(g, e, a, b, max_len, labels)?,
            (Some((a, b)), CycleOrder::Lexicographic) => search.all_short(g, e, a, b, max_len, labels)?,
        };
        out.push(found);
    }
    Ok(out)
}

const PATH_BUDGET: usize = 20_000_000;

struct Search {
    stamp: Vec<u32>,
    now: u32,
    da: Vec<u32>,
    db: Vec<u32>,
    sa: Vec<u32>,
    sb: Vec<u32>,
    on_path: Vec<bool>,
}

impl Search {
    fn new(g: &Graph) -> Search {
        let n = g.n();
        Search {
            stamp: vec![0; n],
            now: 0,
            da: vec![0; n],
            db: vec![0; n],
            sa: vec![0; n],
            sb: vec![0; n],
            on_path: vec![false; n],
        }
    }

    fn next_epoch(&mut self) {
        self.now = self.now.wrapping_add(1);
        if self.now == 0 {
            self.stamp.fill(0);
            self.sa.fill(0);
            self.sb.fill(0);
            self.now = 1;
        }
    }

    #[inline]
    fn dist_a(&self, v: NodeId) -> Option<u32> {
        (self.sa[v] == self.now).then_some(self.da[v])
    }

    #[inline]
    fn dist_b(&self, v: NodeId) -> Option<u32> {
        (self.sb[v] == self.now).then_some(self.db[v])
    }

    /// Bidirectional search for the shortest `a`-`b` path avoiding `e`, then
    /// enumeration of all such shortest paths to pick the least cycle id.
    fn shortest(
        &mut self,
        g: &Graph,
        e: EdgeId,
        a: NodeId,
        b: NodeId,
        max_len: usize,
        labels: &Labels<'_>,
    ) -> Result<Option<EdgeCycle>> {
        self.next_epoch();
        let now = self.now;
        let max_path = (max_len - 1) as u32;
        self.sa[a] = now;
        self.da[a] = 0;
        self.sb[b] = now;
        self.db[b] = 0;
        let mut fa = vec![a];
        let mut fb = vec![b];
        let (mut depth_a, mut depth_b) = (0u32, 0u32);
        let mut best = u32::MAX;
        loop {
            if best <= depth_a + depth_b || depth_a + depth_b >= max_path {
                break;
            }
            let grow_a = match (fa.is_empty(), fb.is_empty()) {
                (true, true) => break,
                (true, false) => false,
                (false, true) => true,
                (false, false) => fa.len() <= fb.len(),
            };
            let mut next = Vec::new();
            let frontier = if grow_a { &fa } else { &fb };
            for &u in frontier {
                for p in g.ports(u) {
                    let Some(w) = p.other() else { continue };
                    if p.edge() == e {
                        continue;
                    }
                    let (here, there) = if grow_a { (self.dist_a(u), self.dist_b(w)) } else { (self.dist_b(u), self.dist_a(w)) };
                    if let Some(t) = there {
                        best = best.min(here.unwrap() + 1 + t);
                    }
                    let known = if grow_a { self.sa[w] == now } else { self.sb[w] == now };
                    if !known {
                        if grow_a {
                            self.sa[w] = now;
                            self.da[w] = depth_a + 1;
                        } else {
                            self.sb[w] = now;
                            self.db[w] = depth_b + 1;
                        }
                        next.push(w);
                    }
                }
            }
            if grow_a {
                fa = next;
                depth_a += 1;
            } else {
                fb = next;
                depth_b += 1;
            }
        }
        if best > max_path {
            return Ok(None);
        }
        // every node on a shortest path is at its exact distance on at least
        // one side, so the walk below stays on the shortest-path DAG
        let len = best;
        let mut nodes = vec![a];
        let mut edges = Vec::new();
        let mut best_cycle: Option<(CycleKey, NodeId)> = None;
        let mut count = 0usize;
        self.walk(g, e, b, len, depth_a, depth_b, &mut nodes, &mut edges, &mut |nodes, edges| {
            count += 1;
            consider(nodes, edges, e, labels, CycleOrder::ShortestFirst, &mut best_cycle);
            count <= PATH_BUDGET
        });
        if count > PATH_BUDGET {
            return Err(Error::Budget(format!("too many shortest cycles through edge {e}")));
        }
        Ok(best_cycle.map(|(key, tail)| EdgeCycle { key, tail }))
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        g: &Graph,
        e: EdgeId,
        b: NodeId,
        len: u32,
        depth_a: u32,
        depth_b: u32,
        nodes: &mut Vec<NodeId>,
        edges: &mut Vec<EdgeId>,
        visit: &mut dyn FnMut(&[NodeId], &[EdgeId]) -> bool,
    ) -> bool {
        let k = edges.len() as u32;
        let u = *nodes.last().unwrap();
        if k == len {
            return u != b || visit(nodes, edges);
        }
        for p in g.ports(u) {
            let Some(w) = p.other() else { continue };
            if p.edge() == e {
                continue;
            }
            let pos = k + 1;
            let ok_a = match self.dist_a(w) {
                Some(d) => d == pos,
                None => pos > depth_a,
            };
            let ok_b = match self.dist_b(w) {
                Some(d) => d == len - pos,
                None => len - pos > depth_b,
            };
            let covered = self.dist_a(w).is_some() || self.dist_b(w).is_some();
            if !(ok_a && ok_b && covered) {
                continue;
            }
            nodes.push(w);
            edges.push(p.edge());
            let go_on = self.walk(g, e, b, len, depth_a, depth_b, nodes, edges, visit);
            nodes.pop();
            edges.pop();
            if !go_on {
                return false;
            }
        }
        true
    }

    /// Depth-first enumeration of every simple `a`-`b` path of length at
    /// most `max_len - 1` avoiding `e`.
    fn all_short(
        &mut self,
        g: &Graph,
        e: EdgeId,
        a: NodeId,
        b: NodeId,
        max_len: usize,
        labels: &Labels<'_>,
    ) -> Result<Option<EdgeCycle>> {
        let mut best: Option<(CycleKey, NodeId)> = None;
        let mut nodes = vec![a];
        let mut edges = Vec::new();
        let mut steps = 0usize;
        self.on_path[a] = true;
        let ok = self.dfs(g, e, b, max_len - 1, &mut nodes, &mut edges, &mut steps, &mut |nodes, edges| {
            consider(nodes, edges, e, labels, CycleOrder::Lexicographic, &mut best);
        });
        self.on_path[a] = false;
        if !ok {
            return Err(Error::Budget(format!("too many short cycles through edge {e}")));
        }
        Ok(best.map(|(key, tail)| EdgeCycle { key, tail }))
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        g: &Graph,
        e: EdgeId,
        b: NodeId,
        max_path: usize,
        nodes: &mut Vec<NodeId>,
        edges: &mut Vec<EdgeId>,
        steps: &mut usize,
        visit: &mut dyn FnMut(&[NodeId], &[EdgeId]),
    ) -> bool {
        *steps += 1;
        if *steps > PATH_BUDGET {
            return false;
        }
        let u = *nodes.last().unwrap();
        if u == b {
            visit(nodes, edges);
            return true;
        }
        if edges.len() == max_path {
            return true;
        }
        for p in g.ports(u) {
            let Some(w) = p.other() else { continue };
            if p.edge() == e || self.on_path[w] {
                continue;
            }
            self.on_path[w] = true;
            nodes.push(w);
            edges.push(p.edge());
            let ok = self.dfs(g, e, b, max_path, nodes, edges, steps, visit);
            nodes.pop();
            edges.pop();
            self.on_path[w] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Closes the path `a .. b` with `e` into a cycle and keeps it if it beats
/// the current best.
fn consider(
    path_nodes: &[NodeId],
    path_edges: &[EdgeId],
    e: EdgeId,
    labels: &Labels<'_>,
    order: CycleOrder,
    best: &mut Option<(CycleKey, NodeId)>,
) {
    // cycle: b -e- a -path- b, written as nodes[i] -edges[i]- nodes[i+1]
    let b = *path_nodes.last().unwrap();
    let mut nodes = Vec::with_capacity(path_nodes.len());
    nodes.push(b);
    nodes.extend_from_slice(&path_nodes[..path_nodes.len() - 1]);
    let mut edges = Vec::with_capacity(path_edges.len() + 1);
    edges.push(e);
    edges.extend_from_slice(path_edges);
    let cycle = Cycle { nodes: &nodes, edges: &edges };
    let key = cycle.key(labels, order);
    if best.as_ref().is_none_or(|(k, _)| key < *k) {
        let tail = cycle.tail_at(labels, 0);
        *best = Some((key, tail));
    }
}
