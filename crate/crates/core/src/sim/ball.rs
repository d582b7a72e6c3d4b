//! Radius-`r` neighborhood collection.

use std::collections::{BTreeMap, HashMap};

use super::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};
use crate::error::Result;
use crate::graph::{Graph, Subgraph};

/// What a node knows after gathering: node labels with their distance from
/// the center, and edges `(label, a, b)` incident to nodes at distance at
/// most `max(r - 1, 0)`. With `r = 0` nothing has been exchanged, so only
/// the center's half-edges are known.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct View {
    pub center: u64,
    pub radius: usize,
    pub nodes: BTreeMap<u64, usize>,
    pub edges: BTreeMap<u64, (u64, Option<u64>)>,
}

impl View {
    /// The view as a graph, nodes and edges relabelled in label order.
    /// `node_of` and `edge_of` hold the labels.
    pub fn to_subgraph(&self) -> Subgraph {
        let index: HashMap<u64, usize> = self.nodes.keys().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut edge_of = Vec::new();
        let mut ends = Vec::new();
        for (&e, &(a, b)) in &self.edges {
            edge_of.push(e as usize);
            ends.push((index[&a], b.map(|b| index[&b])));
        }
        Subgraph {
            graph: Graph::new(self.nodes.len(), ends).expect("view edges join view nodes"),
            node_of: self.nodes.keys().map(|&l| l as usize).collect(),
            edge_of,
        }
    }
}

struct Gather {
    radius: usize,
}

#[derive(Clone, Debug)]
struct Known {
    nodes: HashMap<u64, usize>,
    edges: BTreeMap<u64, (u64, Option<u64>)>,
}

impl NodeProgram for Gather {
    type State = Known;
    type Msg = Known;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Known>, _: &mut NodeRng) -> (Known, Status) {
        let mut edges = BTreeMap::new();
        for p in ctx.ports() {
            if p.other().is_none() {
                edges.insert(ctx.edge_label(p.edge()), (ctx.label, None));
            }
        }
        let k = Known { nodes: HashMap::from([(ctx.label, 0)]), edges };
        if self.radius == 0 {
            return (k, Status::Halted);
        }
        out.broadcast(k.clone());
        (k, Status::Running)
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        s: &mut Known,
        round: usize,
        inbox: &Inbox<'_, Known>,
        out: &mut Outbox<'_, Known>,
        _: &mut NodeRng,
    ) -> Status {
        let ports = ctx.ports();
        for (i, msg) in inbox.iter() {
            for (&l, &d) in &msg.nodes {
                let e = s.nodes.entry(l).or_insert(d + 1);
                *e = (*e).min(d + 1);
            }
            for (&e, &ends) in &msg.edges {
                s.edges.insert(e, ends);
            }
            // the neighbor's own label is the one at distance 0 in its message
            let other = msg.nodes.iter().find(|(_, &d)| d == 0).map(|(&l, _)| l).unwrap();
            s.edges.insert(ctx.edge_label(ports[i].edge()), ordered(ctx.label, other));
        }
        if round >= self.radius {
            return Status::Halted;
        }
        out.broadcast(s.clone());
        Status::Running
    }
}

fn ordered(a: u64, b: u64) -> (u64, Option<u64>) {
    (a.min(b), Some(a.max(b)))
}

/// Every node's radius-`r` view; takes exactly `r` rounds. With
/// `labels`, nodes and edges are known by those labels instead of ids.
pub fn gather_ball(g: &Graph, r: usize, labels: Option<(Vec<u64>, Vec<u64>)>) -> Result<(Vec<View>, RunMetrics)> {
    let engine = match labels {
        Some((nodes, edges)) => Engine::new(g).with_labels(nodes, edges),
        None => Engine::new(g),
    };
    let out = engine.run(&Gather { radius: r }, 0, r)?;
    let limit = r.saturating_sub(1);
    let views = out
        .states
        .into_iter()
        .map(|k| {
            let center = own_label(&k);
            let nodes: BTreeMap<u64, usize> = k.nodes.into_iter().filter(|&(_, d)| d <= r).collect();
            let edges = k
                .edges
                .into_iter()
                .filter(|(_, (a, b))| {
                    nodes.get(a).is_some_and(|&d| d <= limit) || b.and_then(|b| nodes.get(&b)).is_some_and(|&d| d <= limit)
                })
                .collect();
            View { center, radius: r, nodes, edges }
        })
        .collect();
    Ok((views, out.metrics))
}

fn own_label(k: &Known) -> u64 {
    k.nodes.iter().find(|(_, &d)| d == 0).map(|(&l, _)| l).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, cycle};

    #[test]
    fn clique_radius_one_sees_own_edges_only() {
        let g = clique(4).unwrap();
        let (views, m) = gather_ball(&g, 1, None).unwrap();
        assert_eq!(m.rounds, 1);
        assert_eq!(views[0].nodes.len(), 4);
        assert_eq!(views[0].edges.len(), 3);
    }

    #[test]
    fn cycle_radius_three_sees_everything() {
        let g = cycle(6).unwrap();
        let (views, m) = gather_ball(&g, 3, None).unwrap();
        assert_eq!(m.rounds, 3);
        for v in &views {
            assert_eq!(v.nodes.len(), 6);
            assert_eq!(v.edges.len(), 6);
        }
    }

    #[test]
    fn radius_zero_is_free() {
        let g = Graph::new(2, [(0, Some(1)), (1, None)]).unwrap();
        let (views, m) = gather_ball(&g, 0, None).unwrap();
        assert_eq!(m.rounds, 0);
        assert_eq!(views[1].nodes.len(), 1);
        assert_eq!(views[1].edges.len(), 1);
        assert_eq!(views[0].edges.len(), 0);
    }

    #[test]
    fn labels_replace_ids() {
        let g = cycle(5).unwrap();
        let (views, _) = gather_ball(&g, 1, Some(((100..105).collect(), (200..205).collect()))).unwrap();
        assert_eq!(views[0].center, 100);
        assert!(views[0].edges.contains_key(&200));
        assert!(views[0].nodes.contains_key(&104));
        let sub = views[0].to_subgraph();
        assert_eq!(sub.graph.m(), 2);
        assert_eq!(sub.node_of, vec![100, 101, 104]);
    }
}
