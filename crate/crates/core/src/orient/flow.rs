//! Low out-degree orientations by flipping blocking sets of shortest paths.
//!
//! Around the current orientation sits a flow network: a source with one arc
//! to a heavy node `u` per out-edge above the bound `D`, and a sink with one
//! arc from a light node per missing out-edge below `D`. Every iteration
//! flips a maximal set of edge-disjoint shortest source-sink paths, which
//! moves one out-edge from a heavy node to a light node per path.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::artifact::Orientation;
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::mis::luby_mis;
use crate::sim::RunMetrics;
use crate::split::check_eps;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    #[default]
    BlockingGreedy,
    LubyRounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub mode: FlowMode,
    /// Iteration cap multiplier: at most `ceil(c_l ln n / eps)` iterations.
    pub c_l: f64,
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { mode: FlowMode::BlockingGreedy, c_l: 3.0, seed: 0 }
    }
}

pub const LUBY_MAX_NODES: usize = 60;
pub const LUBY_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    pub i: usize,
    /// Source-sink distance when the iteration starts.
    pub dist: usize,
    pub heavy: usize,
    pub light: usize,
    pub paths: usize,
    /// Distance after the flips; `None` once the sink is unreachable.
    pub dist_after: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub orientation: Orientation,
    pub metrics: RunMetrics,
    pub iterations: Vec<IterationStats>,
    pub bound: usize,
}

/// A source-sink path: heavy start, edges in order, light end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

impl FlowPath {
    /// Length counting the source and sink arcs.
    pub fn len(&self) -> usize {
        self.edges.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub struct VirtualFlowGraph<'g> {
    graph: &'g Graph,
    orientation: Orientation,
    out: Vec<usize>,
    d: usize,
    /// Source and sink arcs at construction.
    initial_source_arcs: usize,
    initial_sink_arcs: usize,
    flipped: usize,
    pub iteration: usize,
}

impl<'g> VirtualFlowGraph<'g> {
    pub fn new(graph: &'g Graph, orientation: Orientation, d: usize) -> VirtualFlowGraph<'g> {
        let out = orientation.out_degrees(graph);
        let initial_source_arcs = out.iter().map(|&k| k.saturating_sub(d)).sum();
        let initial_sink_arcs = out.iter().map(|&k| d.saturating_sub(k)).sum();
        VirtualFlowGraph {
            graph,
            orientation,
            out,
            d,
            initial_source_arcs,
            initial_sink_arcs,
            flipped: 0,
            iteration: 0,
        }
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orientation
    }

    pub fn into_orientation(self) -> Orientation {
        self.orientation
    }

    pub fn out_degrees(&self) -> &[usize] {
        &self.out
    }

    /// Arcs from the source into `u`.
    pub fn excess(&self, u: NodeId) -> usize {
        self.out[u].saturating_sub(self.d)
    }

    /// Arcs from `u` into the sink.
    pub fn room(&self, u: NodeId) -> usize {
        self.d.saturating_sub(self.out[u])
    }

    pub fn heavy(&self) -> Vec<bool> {
        (0..self.graph.n()).map(|u| self.excess(u) > 0).collect()
    }

    pub fn light(&self) -> Vec<bool> {
        (0..self.graph.n()).map(|u| self.room(u) > 0).collect()
    }

    fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (EdgeId, NodeId)> + '_ {
        self.graph.ports(v).iter().filter_map(move |p| {
            let w = p.other()?;
            (self.orientation.tail(p.edge()) == v).then_some((p.edge(), w))
        })
    }

    /// Distances from the source, a heavy node being at distance 1, and the
    /// distance of the sink.
    pub fn distances(&self) -> (Vec<usize>, Option<usize>) {
        let n = self.graph.n();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for u in 0..n {
            if self.excess(u) > 0 {
                dist[u] = 1;
                queue.push_back(u);
            }
        }
        let mut sink: Option<usize> = None;
        while let Some(v) = queue.pop_front() {
            if sink.is_some_and(|s| dist[v] + 1 >= s) {
                break;
            }
            if self.room(v) > 0 {
                sink = Some(dist[v] + 1);
                continue;
            }
            for (_, w) in self.out_edges(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (dist, sink)
    }

    /// Flips a path and checks that only its ends change out-degree.
    pub fn flip(&mut self, p: &FlowPath) -> Result<()> {
        let (u, w) = (p.nodes[0], *p.nodes.last().unwrap());
        if self.excess(u) == 0 || self.room(w) == 0 {
            return Err(Error::Invariant(format!("path {u} -> {w} has no free source or sink arc")));
        }
        for (i, &e) in p.edges.iter().enumerate() {
            if self.orientation.tail(e) != p.nodes[i] {
                return Err(Error::Invariant(format!("edge {e} is not an out-edge of {}", p.nodes[i])));
            }
        }
        let before: Vec<usize> = p.nodes.iter().map(|&v| self.out[v]).collect();
        for &e in &p.edges {
            self.orientation.flip(self.graph, e);
        }
        self.out[u] -= 1;
        self.out[w] += 1;
        for (k, &v) in p.nodes.iter().enumerate().skip(1).take(p.nodes.len() - 2) {
            if self.out[v] != before[k] {
                return Err(Error::Invariant(format!("interior node {v} changed out-degree")));
            }
        }
        self.flipped += 1;
        Ok(())
    }

    /// Remaining source arcs plus flipped paths equal the arcs at
    /// construction, and likewise for the sink.
    pub fn check_arc_ledger(&self) -> Result<()> {
        let s: usize = (0..self.graph.n()).map(|u| self.excess(u)).sum();
        let t: usize = (0..self.graph.n()).map(|u| self.room(u)).sum();
        if s + self.flipped != self.initial_source_arcs || t + self.flipped != self.initial_sink_arcs {
            return Err(Error::Invariant("source or sink arcs out of balance".into()));
        }
        Ok(())
    }

    fn admissible(&self, dist: &[usize], len: usize, v: NodeId, w: NodeId) -> bool {
        dist[w] != usize::MAX && dist[w] == dist[v] + 1 && dist[w] < len
    }

    /// Maximal set of edge-disjoint source-sink paths of length `len`, by
    /// depth-first search in the layered graph. Paths are flipped as found.
    pub fn blocking_greedy(&mut self, dist: &[usize], len: usize) -> Result<Vec<FlowPath>> {
        let n = self.graph.n();
        let mut next_port = vec![0usize; n];
        let mut dead = vec![false; n];
        let mut found = Vec::new();
        let starts: Vec<NodeId> = (0..n).filter(|&u| self.excess(u) > 0).collect();
        for u in starts {
            while self.excess(u) > 0 && !dead[u] {
                match self.descend(u, dist, len, &mut next_port, &mut dead) {
                    Some(p) => {
                        self.flip(&p)?;
                        found.push(p);
                    }
                    None => break,
                }
            }
        }
        Ok(found)
    }

    fn descend(
        &self,
        u: NodeId,
        dist: &[usize],
        len: usize,
        next_port: &mut [usize],
        dead: &mut [bool],
    ) -> Option<FlowPath> {
        let mut nodes = vec![u];
        let mut edges: Vec<EdgeId> = Vec::new();
        loop {
            let v = *nodes.last().unwrap();
            if dist[v] == len - 1 && self.room(v) > 0 {
                return Some(FlowPath { nodes, edges });
            }
            let ports = self.graph.ports(v);
            let mut step = None;
            while next_port[v] < ports.len() {
                let p = ports[next_port[v]];
                if let Some(w) = p.other() {
                    if self.orientation.tail(p.edge()) == v && !dead[w] && self.admissible(dist, len, v, w) {
                        step = Some((p.edge(), w));
                        break;
                    }
                }
                next_port[v] += 1;
            }
            match step {
                Some((e, w)) => {
                    edges.push(e);
                    nodes.push(w);
                }
                None => {
                    dead[v] = true;
                    nodes.pop();
                    if nodes.is_empty() {
                        return None;
                    }
                    edges.pop();
                    let parent = *nodes.last().unwrap();
                    next_port[parent] += 1;
                }
            }
        }
    }

    /// Every source-sink path of length `len` with a numbered source arc and
    /// sink arc.
    fn enumerate(&self, dist: &[usize], len: usize) -> Result<Vec<(FlowPath, usize, usize)>> {
        let mut out = Vec::new();
        for u in (0..self.graph.n()).filter(|&u| self.excess(u) > 0) {
            let mut stack: Vec<(Vec<NodeId>, Vec<EdgeId>)> = vec![(vec![u], Vec::new())];
            while let Some((nodes, edges)) = stack.pop() {
                let v = *nodes.last().unwrap();
                if dist[v] == len - 1 {
                    if self.room(v) > 0 {
                        for a in 0..self.excess(u) {
                            for b in 0..self.room(v) {
                                if out.len() == LUBY_BUDGET {
                                    return Err(Error::Budget(format!(
                                        "more than {LUBY_BUDGET} candidate paths; use blocking-greedy"
                                    )));
                                }
                                out.push((FlowPath { nodes: nodes.clone(), edges: edges.clone() }, a, b));
                            }
                        }
                    }
                    continue;
                }
                for (e, w) in self.out_edges(v) {
                    if self.admissible(dist, len, v, w) {
                        let mut n2 = nodes.clone();
                        let mut e2 = edges.clone();
                        n2.push(w);
                        e2.push(e);
                        stack.push((n2, e2));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Maximal independent set of the conflict graph over all shortest
    /// paths, two paths conflicting when they share an arc.
    pub fn blocking_luby(&mut self, dist: &[usize], len: usize, seed: u64) -> Result<(Vec<FlowPath>, RunMetrics)> {
        if self.graph.n() > LUBY_MAX_NODES {
            return Err(Error::Budget(format!(
                "{} nodes is beyond the supergraph limit; use blocking-greedy",
                self.graph.n()
            )));
        }
        let candidates = self.enumerate(dist, len)?;
        let mut groups: HashMap<(u8, usize, usize), Vec<usize>> = HashMap::new();
        for (i, (p, a, b)) in candidates.iter().enumerate() {
            groups.entry((0, p.nodes[0], *a)).or_default().push(i);
            groups.entry((1, *p.nodes.last().unwrap(), *b)).or_default().push(i);
            for &e in &p.edges {
                groups.entry((2, e, 0)).or_default().push(i);
            }
        }
        let mut keys: Vec<_> = groups.keys().copied().collect();
        keys.sort_unstable();
        let mut conflicts = Vec::new();
        for k in keys {
            let group = &groups[&k];
            for (x, &i) in group.iter().enumerate() {
                for &j in &group[x + 1..] {
                    conflicts.push((i, Some(j)));
                }
            }
        }
        conflicts.sort_unstable();
        conflicts.dedup();
        let super_graph = Graph::new(candidates.len(), conflicts)?;
        let cap = 64 * (candidates.len().max(2)).ilog2() as usize + 64;
        let (chosen, m) = luby_mis(&super_graph, seed, cap)?;
        let mut found = Vec::new();
        for ((p, _, _), keep) in candidates.into_iter().zip(chosen) {
            if keep {
                self.flip(&p)?;
                found.push(p);
            }
        }
        Ok((found, RunMetrics::phase("luby-paths", m.rounds * len, m.messages)))
    }
}

/// Out-degree at most `ceil((1 + eps) a)` on a graph of arboricity at most
/// `a`, starting from the lower-to-higher orientation.
pub fn arboricity_orient(g: &Graph, a: usize, eps: f64, cfg: &FlowConfig) -> Result<FlowOutcome> {
    check_eps(eps)?;
    if a == 0 {
        return Err(param("arboricity must be at least 1"));
    }
    let d = ((1.0 + eps) * a as f64).ceil() as usize;
    orient_to(g, Orientation::lower_to_higher(g), d, eps, cfg)
}

/// Lowers every out-degree to at most `d`; a node never drops below
/// `min(out, d)`. Fails when a heavy node survives the iteration cap.
pub fn orient_to(g: &Graph, start: Orientation, d: usize, eps: f64, cfg: &FlowConfig) -> Result<FlowOutcome> {
    check_eps(eps)?;
    let cap = (cfg.c_l * (g.n().max(2) as f64).ln() / eps).ceil() as usize;
    let mut net = VirtualFlowGraph::new(g, start, d);
    let mut iterations = Vec::new();
    let (mut rounds, mut messages) = (0usize, 0u64);
    let mut heavy = net.heavy();
    let mut light = net.light();
    loop {
        let (dist, sink) = net.distances();
        let heavy_count = heavy.iter().filter(|&&h| h).count();
        if heavy_count == 0 {
            break;
        }
        let Some(len) = sink else {
            let u = heavy.iter().position(|&h| h).unwrap();
            return Err(Error::Invariant(format!("heavy node {u} cannot reach a light node")));
        };
        rounds += len;
        // lengths below 3 + i would contradict the previous blocking step
        let i = len.checked_sub(3).filter(|&i| i >= net.iteration).ok_or_else(|| {
            Error::Invariant(format!("distance {len} below {} at iteration {}", 3 + net.iteration, net.iteration))
        })?;
        if i > cap {
            return Err(Error::Invariant(format!("{heavy_count} heavy nodes left after {cap} iterations")));
        }
        net.iteration = i;
        let found = match cfg.mode {
            FlowMode::BlockingGreedy => {
                let found = net.blocking_greedy(&dist, len)?;
                rounds += found.len() * len;
                found
            }
            FlowMode::LubyRounds => {
                let (found, m) = net.blocking_luby(&dist, len, cfg.seed ^ ((i as u64) << 20))?;
                rounds += m.rounds;
                messages += m.messages;
                found
            }
        };
        net.check_arc_ledger()?;
        let (_, after) = net.distances();
        if after.is_some_and(|a| a <= len) {
            return Err(Error::Invariant(format!("a path of length {len} survived iteration {i}")));
        }
        let (h2, l2) = (net.heavy(), net.light());
        if let Some(v) = (0..g.n()).find(|&v| (h2[v] && !heavy[v]) || (l2[v] && !light[v])) {
            return Err(Error::Invariant(format!("node {v} joined the heavy or light set")));
        }
        iterations.push(IterationStats {
            i,
            dist: len,
            heavy: heavy_count,
            light: light.iter().filter(|&&l| l).count(),
            paths: found.len(),
            dist_after: after,
        });
        heavy = h2;
        light = l2;
        net.iteration = i + 1;
    }
    let orientation = net.into_orientation();
    if orientation.max_out_degree(g) > d {
        return Err(Error::Invariant(format!("out-degree above {d} at the end")));
    }
    let metrics = RunMetrics::phase("blocking-paths", rounds, messages);
    Ok(FlowOutcome { orientation, metrics, iterations, bound: d })
}
