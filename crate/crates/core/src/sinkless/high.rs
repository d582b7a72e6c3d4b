//! Minimum degree above the shattering threshold.

use super::cycles::Labels;
use super::deterministic::deterministic_sinkless_with;
use super::shatter::pre_shatter_with;
use super::SinklessConfig;
use crate::artifact::Orientation;
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::RunMetrics;

/// A structure in which every node has exactly `d` edges or half-edges.
#[derive(Clone, Debug)]
pub struct Regularized {
    pub graph: Graph,
    /// Copy to original node. Copy 0 of `v` is `v`.
    pub owner: Vec<NodeId>,
    /// Structure edge to original edge.
    pub edge_of: Vec<EdgeId>,
}

/// Splits each node of degree `deg >= d` into `floor(deg / d)` copies with
/// `d` edges each, in adjacency order. Left-over edges are released by that
/// node: an edge released at both ends disappears, one released at one end
/// becomes a half-edge of the other.
pub fn regularize(g: &Graph, d: usize) -> Result<Regularized> {
    if d == 0 {
        return Err(param("degree must be positive"));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) < d) {
        return Err(Error::Precondition(format!("node {v} has degree {} < {d}", g.degree(v))));
    }
    let mut owner: Vec<NodeId> = (0..g.n()).collect();
    let mut at = vec![[None::<NodeId>; 2]; g.m()];
    for v in 0..g.n() {
        let k = g.degree(v) / d;
        let mut ids = vec![v];
        for _ in 1..k {
            ids.push(owner.len());
            owner.push(v);
        }
        for (i, p) in g.ports(v).iter().enumerate().take(k * d) {
            at[p.edge()][g.side(p.edge(), v)] = Some(ids[i / d]);
        }
    }
    let mut ends = Vec::new();
    let mut edge_of = Vec::new();
    for e in 0..g.m() {
        match at[e] {
            [Some(a), b] => ends.push((a, b)),
            [None, Some(b)] => ends.push((b, None)),
            [None, None] => continue,
        }
        edge_of.push(e);
    }
    let graph = Graph::new(owner.len(), ends)?;
    Ok(Regularized { graph, owner, edge_of })
}

impl Regularized {
    /// Carries an orientation of the structure back; edges that vanished go
    /// from the lower id to the higher.
    pub fn lift(&self, g: &Graph, o: &Orientation) -> Orientation {
        let mut tail: Vec<NodeId> = g.edges().map(|(_, a, b)| b.map_or(a, |b| a.min(b))).collect();
        for (h, &e) in self.edge_of.iter().enumerate() {
            tail[e] = self.owner[o.tail(h)];
        }
        Orientation::from_tails(tail)
    }
}

/// Regularize to `d`, pre-shatter, and finish every residual component
/// deterministically.
pub fn sinkless_high_degree(g: &Graph, d: usize, seed: u64, cfg: &SinklessConfig) -> Result<(Orientation, RunMetrics)> {
    let half = d.div_ceil(2);
    if half < 3 {
        return Err(param(format!("degree {d} is too small for shattering")));
    }
    let reg = regularize(g, d)?;
    let h = &reg.graph;
    let shattered = pre_shatter_with(h, seed, cfg.mark_probability)?;
    let mut metrics = RunMetrics::phase("regularize", 1, 2 * g.m() as u64);
    metrics.append(shattered.metrics.clone());

    let mut tail: Vec<Option<NodeId>> = shattered.partial.clone();
    let res = &shattered.residual;
    let comps = res.graph.components();
    let mut finish = RunMetrics::default();
    for members in comps.members() {
        let piece = res.graph.induced(&members, false);
        let node_labels: Vec<usize> = piece.node_of.iter().map(|&v| res.node_of[v]).collect();
        let edge_labels: Vec<usize> = piece.edge_of.iter().map(|&e| res.edge_of[e]).collect();
        let labels = Labels { node: Some(&node_labels), edge: Some(&edge_labels) };
        let (o, m, _) = deterministic_sinkless_with(&piece.graph, half, cfg.order, &labels)?;
        for (le, &he) in edge_labels.iter().enumerate() {
            tail[he] = Some(node_labels[o.tail(le)]);
        }
        finish.parallel(&m);
    }
    metrics.then("residual", finish.rounds, finish.messages);

    let tail: Vec<NodeId> = tail
        .into_iter()
        .enumerate()
        .map(|(e, t)| t.ok_or(Error::IncompleteArtifact { edge: e }))
        .collect::<Result<_>>()?;
    Ok((reg.lift(g, &Orientation::from_tails(tail)), metrics))
}
