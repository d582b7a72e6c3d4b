//! Immutable multigraph with optional half-edges.
//!
//! Edges are identified by their index in construction order. A half-edge has
//! a single endpoint; it counts toward that endpoint's degree but carries no
//! messages. Parallel edges are allowed, self-loops are not.

pub mod generate;
pub mod virtualize;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type EdgeId = usize;

const HALF: u32 = u32::MAX;

/// One incidence of an edge at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    edge: u32,
    other: u32,
}

impl Port {
    #[inline]
    pub fn edge(self) -> EdgeId {
        self.edge as EdgeId
    }

    #[inline]
    pub fn other(self) -> Option<NodeId> {
        (self.other != HALF).then_some(self.other as NodeId)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    ends: Vec<[u32; 2]>,
    offsets: Vec<usize>,
    ports: Vec<Port>,
}

impl Graph {
    /// Builds a graph whose edge `i` is the `i`-th item. `None` as second
    /// endpoint makes a half-edge.
    pub fn new<I>(n: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (NodeId, Option<NodeId>)>,
    {
        if n >= HALF as usize {
            return Err(Error::InvalidGraph(format!("{n} nodes is too many")));
        }
        let mut ends = Vec::new();
        for (u, v) in edges {
            let e = ends.len();
            if u >= n || v.is_some_and(|v| v >= n) {
                return Err(Error::InvalidGraph(format!("edge {e} has an endpoint outside 0..{n}")));
            }
            if v == Some(u) {
                return Err(Error::InvalidGraph(format!("edge {e} is a self-loop at {u}")));
            }
            ends.push([u as u32, v.map_or(HALF, |v| v as u32)]);
        }
        if ends.len() >= HALF as usize {
            return Err(Error::InvalidGraph("too many edges".into()));
        }
        Ok(Self::from_ends(n, ends))
    }

    fn from_ends(n: usize, ends: Vec<[u32; 2]>) -> Graph {
        let mut deg = vec![0usize; n + 1];
        for &[a, b] in &ends {
            deg[a as usize] += 1;
            if b != HALF {
                deg[b as usize] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut ports = vec![Port { edge: 0, other: 0 }; offsets[n]];
        for (e, &[a, b]) in ends.iter().enumerate() {
            ports[fill[a as usize]] = Port { edge: e as u32, other: b };
            fill[a as usize] += 1;
            if b != HALF {
                ports[fill[b as usize]] = Port { edge: e as u32, other: a };
                fill[b as usize] += 1;
            }
        }
        Graph { n, ends, offsets, ports }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.ends.len()
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (NodeId, Option<NodeId>) {
        let [a, b] = self.ends[e];
        (a as NodeId, (b != HALF).then_some(b as NodeId))
    }

    /// Both endpoints of a full edge.
    #[inline]
    pub fn full_endpoints(&self, e: EdgeId) -> Option<(NodeId, NodeId)> {
        let [a, b] = self.ends[e];
        (b != HALF).then_some((a as NodeId, b as NodeId))
    }

    #[inline]
    pub fn is_half(&self, e: EdgeId) -> bool {
        self.ends[e][1] == HALF
    }

    /// The endpoint of `e` opposite to `v`; `None` for a half-edge.
    #[inline]
    pub fn other(&self, e: EdgeId, v: NodeId) -> Option<NodeId> {
        let [a, b] = self.ends[e];
        if b == HALF {
            None
        } else if a as NodeId == v {
            Some(b as NodeId)
        } else {
            Some(a as NodeId)
        }
    }

    /// Index (0 or 1) of `v` among the endpoints of `e`.
    #[inline]
    pub fn side(&self, e: EdgeId, v: NodeId) -> usize {
        usize::from(self.ends[e][0] as NodeId != v)
    }

    #[inline]
    pub fn ports(&self, v: NodeId) -> &[Port] {
        &self.ports[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Global index of the first port of `v`; ports of all nodes are laid out
    /// contiguously in node order.
    #[inline]
    pub fn port_base(&self, v: NodeId) -> usize {
        self.offsets[v]
    }

    #[inline]
    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn has_half_edges(&self) -> bool {
        self.ends.iter().any(|e| e[1] == HALF)
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, NodeId, Option<NodeId>)> + '_ {
        (0..self.m()).map(move |e| {
            let (a, b) = self.endpoints(e);
            (e, a, b)
        })
    }

    pub fn is_regular(&self, d: usize) -> bool {
        (0..self.n).all(|v| self.degree(v) == d)
    }

    /// Recomputes the adjacency from the edge list and compares.
    pub fn audit(&self) -> Result<()> {
        let rebuilt = Self::from_ends(self.n, self.ends.clone());
        if rebuilt != *self {
            return Err(Error::InvalidGraph("adjacency does not match the edge list".into()));
        }
        for (e, &[a, b]) in self.ends.iter().enumerate() {
            if a as usize >= self.n || (b != HALF && (b as usize >= self.n || a == b)) {
                return Err(Error::InvalidGraph(format!("edge {e} is malformed")));
            }
        }
        let total: usize = (0..self.n).map(|v| self.degree(v)).sum();
        let halves = self.ends.iter().filter(|e| e[1] == HALF).count();
        if total != 2 * self.m() - halves {
            return Err(Error::InvalidGraph("degree sum mismatch".into()));
        }
        Ok(())
    }

    /// Connected components over full edges, labelled in order of their
    /// smallest node.
    pub fn components(&self) -> Components {
        let mut label = vec![u32::MAX; self.n];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for p in self.ports(u) {
                    if let Some(w) = p.other() {
                        if label[w] == u32::MAX {
                            label[w] = count;
                            queue.push_back(w);
                        }
                    }
                }
            }
            count += 1;
        }
        Components { label, count: count as usize }
    }

    /// Same node set, only the listed edges. Edge `i` of the result is
    /// `edges[i]` of `self`.
    pub fn edge_subgraph(&self, edges: &[EdgeId]) -> Graph {
        let ends = edges.iter().map(|&e| self.ends[e]).collect();
        Self::from_ends(self.n, ends)
    }

    /// Subgraph induced by `nodes` (relabelled densely in the given order).
    /// Edges with exactly one endpoint inside become half-edges when
    /// `boundary_as_half` is set and are dropped otherwise. Half-edges of
    /// kept nodes are kept.
    pub fn induced(&self, nodes: &[NodeId], boundary_as_half: bool) -> Subgraph {
        let mut local = vec![u32::MAX; self.n];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i as u32;
        }
        let mut ends = Vec::new();
        let mut edge_of = Vec::new();
        for e in 0..self.m() {
            let [a, b] = self.ends[e];
            let la = local[a as usize];
            let lb = if b == HALF { HALF } else { local[b as usize] };
            let inside_a = la != u32::MAX;
            let inside_b = b != HALF && lb != u32::MAX;
            match (inside_a, inside_b) {
                (true, true) => ends.push([la, lb]),
                (true, false) if b == HALF || boundary_as_half => ends.push([la, HALF]),
                (false, true) if boundary_as_half => ends.push([lb, HALF]),
                _ => continue,
            }
            edge_of.push(e);
        }
        Subgraph {
            graph: Self::from_ends(nodes.len(), ends),
            node_of: nodes.to_vec(),
            edge_of,
        }
    }

    /// Two copies `(v, 0)` = `v` and `(v, 1)` = `v + n`; edge `uv` becomes
    /// `u0-v1` and `u1-v0`. Half-edges are dropped.
    pub fn bipartite_double_cover(&self) -> Graph {
        let n = self.n as u32;
        let mut ends = Vec::with_capacity(2 * self.m());
        for &[a, b] in &self.ends {
            if b != HALF {
                ends.push([a, b + n]);
                ends.push([a + n, b]);
            }
        }
        Self::from_ends(2 * self.n, ends)
    }

    /// Breadth-first distances over full edges from a set of sources;
    /// `usize::MAX` where unreachable.
    pub fn bfs_distances(&self, sources: &[NodeId]) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for p in self.ports(u) {
                if let Some(w) = p.other() {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n,
            edges: self.edges().collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Graph> {
        for (i, &(e, _, _)) in json.edges.iter().enumerate() {
            if e != i {
                return Err(Error::InvalidGraph(format!(
                    "edge ids must be 0..m in order; position {i} holds {e}"
                )));
            }
        }
        Graph::new(json.n, json.edges.iter().map(|&(_, u, v)| (u, v)))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("graph serialization cannot fail")
    }

    pub fn from_json_str(s: &str) -> Result<Graph> {
        let json: GraphJson = serde_json::from_str(s)?;
        Graph::from_json(&json)
    }
}

/// On-disk form: `{"n": .., "edges": [[id, u, v|null], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(EdgeId, NodeId, Option<NodeId>)>,
}

#[derive(Clone, Debug)]
pub struct Components {
    pub label: Vec<u32>,
    pub count: usize,
}

impl Components {
    /// Node lists per component, each sorted ascending.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.label.iter().enumerate() {
            out[c as usize].push(v);
        }
        out
    }

    pub fn largest(&self) -> usize {
        let mut size = vec![0usize; self.count];
        for &c in &self.label {
            size[c as usize] += 1;
        }
        size.into_iter().max().unwrap_or(0)
    }
}

/// A relabelled piece of a larger graph.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    /// Local node index to parent node id.
    pub node_of: Vec<NodeId>,
    /// Local edge index to parent edge id.
    pub edge_of: Vec<EdgeId>,
}
