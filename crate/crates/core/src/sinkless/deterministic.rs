//! Deterministic sinkless orientation for graphs of minimum degree at least 3.

use super::cycles::{min_short_cycles, min_short_cycles_on, CycleOrder, EdgeCycle, Labels};
use crate::artifact::Orientation;
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::ball::gather_ball;
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};

/// Longest cycle counted as short: `floor(2 log_{d-1} N + 1)`.
pub fn short_cycle_bound(d: usize, n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    (2.0 * (n as f64).ln() / ((d - 1) as f64).ln() + 1.0 + 1e-9).floor() as usize
}

/// What the orientation was built from, for inspection.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub short_len: usize,
    pub cycles: Vec<Option<EdgeCycle>>,
    pub short_node: Vec<bool>,
    /// Distance to the nearest short node.
    pub dist: Vec<usize>,
}

fn check_degrees(g: &Graph, d: usize) -> Result<()> {
    if d < 3 {
        return Err(param(format!("minimum degree parameter must be at least 3, got {d}")));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) < d) {
        return Err(Error::Precondition(format!("node {v} has degree {} < {d}", g.degree(v))));
    }
    Ok(())
}

pub fn deterministic_sinkless(g: &Graph, d: usize) -> Result<(Orientation, RunMetrics)> {
    let (o, m, _) = deterministic_sinkless_with(g, d, CycleOrder::default(), &Labels::default())?;
    Ok((o, m))
}

/// `labels` stand in for ids in every tie-break and cycle id, so a piece
/// of a larger graph is oriented as the whole graph would orient it.
pub fn deterministic_sinkless_with(
    g: &Graph,
    d: usize,
    order: CycleOrder,
    labels: &Labels<'_>,
) -> Result<(Orientation, RunMetrics, Diagnostics)> {
    check_degrees(g, d)?;
    let short_len = short_cycle_bound(d, g.n());
    let cycles = min_short_cycles(g, short_len, order, labels)?;
    let short_node: Vec<bool> = (0..g.n())
        .map(|v| g.ports(v).iter().any(|p| p.other().is_none() || cycles[p.edge()].is_some()))
        .collect();
    let sources: Vec<NodeId> = (0..g.n()).filter(|&v| short_node[v]).collect();
    let dist = g.bfs_distances(&sources);
    if let Some(v) = (0..g.n()).find(|&v| dist[v] == usize::MAX) {
        return Err(Error::Invariant(format!("node {v} cannot reach a short node")));
    }
    let parent: Vec<Option<EdgeId>> = (0..g.n())
        .map(|v| if short_node[v] { None } else { parent_edge(g, v, &dist, labels) })
        .collect();

    let mut tail: Vec<NodeId> = Vec::with_capacity(g.m());
    for (e, a, b) in g.edges() {
        let t = match b {
            None => a,
            Some(b) => {
                if let Some(c) = &cycles[e] {
                    c.tail
                } else if parent[a] == Some(e) {
                    a
                } else if parent[b] == Some(e) {
                    b
                } else if labels.node(a) < labels.node(b) {
                    a
                } else {
                    b
                }
            }
        };
        tail.push(t);
    }

    let has_full = (0..g.m()).any(|e| !g.is_half(e));
    let max_dist = dist.iter().copied().max().unwrap_or(0);
    let rounds = if has_full { short_len.div_ceil(2) + max_dist } else { 0 };
    let mut metrics = RunMetrics::phase("short-cycles", if has_full { short_len.div_ceil(2) } else { 0 }, 0);
    metrics.then("long-nodes", rounds - metrics.rounds, 0);
    Ok((Orientation::from_tails(tail), metrics, Diagnostics { short_len, cycles, short_node, dist }))
}

fn parent_edge(g: &Graph, v: NodeId, dist: &[usize], labels: &Labels<'_>) -> Option<EdgeId> {
    g.ports(v)
        .iter()
        .filter_map(|p| p.other().map(|w| (w, p.edge())))
        .filter(|&(w, _)| dist[w] + 1 == dist[v])
        .min_by_key(|&(w, e)| (labels.node(w), labels.edge(e)))
        .map(|(_, e)| e)
}

/// The same orientation computed by message passing: every node gathers
/// its ball, decides its short edges locally, then long nodes learn their
/// distance from a wave started by the short nodes.
pub fn deterministic_sinkless_local(g: &Graph, d: usize, order: CycleOrder) -> Result<(Orientation, RunMetrics)> {
    check_degrees(g, d)?;
    let short_len = short_cycle_bound(d, g.n());
    let has_full = (0..g.m()).any(|e| !g.is_half(e));
    let radius = if has_full { short_len.div_ceil(2) } else { 0 };
    let (views, gathered) = gather_ball(g, radius, None)?;
    let mut metrics = RunMetrics::phase("short-cycles", gathered.rounds, gathered.messages);

    // local decisions on incident edges: (edge, tail) for short edges
    let mut short_tail: Vec<Option<NodeId>> = vec![None; g.m()];
    let mut short_node = vec![false; g.n()];
    for (v, view) in views.iter().enumerate() {
        let sub = view.to_subgraph();
        let center = sub.node_of.iter().position(|&l| l == v).unwrap();
        let local_edges: Vec<EdgeId> = sub.graph.ports(center).iter().map(|p| p.edge()).collect();
        let labels = Labels { node: Some(&sub.node_of), edge: Some(&sub.edge_of) };
        let found = min_short_cycles_on(&sub.graph, &local_edges, short_len, order, &labels)?;
        for (&le, c) in local_edges.iter().zip(found) {
            let e = sub.edge_of[le];
            if g.is_half(e) {
                short_node[v] = true;
                continue;
            }
            if let Some(c) = c {
                short_node[v] = true;
                let t = sub.node_of[c.tail];
                match short_tail[e] {
                    Some(prev) if prev != t => {
                        return Err(Error::Invariant(format!("endpoints disagree on edge {e}")));
                    }
                    _ => short_tail[e] = Some(t),
                }
            }
        }
    }

    let engine = Engine::new(g);
    let wave = Wave { short: &short_node };
    let out = engine.run(&wave, 0, g.n() + 1)?;
    metrics.then("long-nodes", out.metrics.rounds, out.metrics.messages);

    let mut tail = Vec::with_capacity(g.m());
    for (e, a, b) in g.edges() {
        let t = match b {
            None => a,
            Some(b) => short_tail[e].unwrap_or_else(|| {
                if out.states[a].parent == Some(e) {
                    a
                } else if out.states[b].parent == Some(e) {
                    b
                } else {
                    a.min(b)
                }
            }),
        };
        tail.push(t);
    }
    Ok((Orientation::from_tails(tail), metrics))
}

struct Wave<'a> {
    short: &'a [bool],
}

#[derive(Debug, Default)]
struct WaveState {
    parent: Option<EdgeId>,
}

impl NodeProgram for Wave<'_> {
    type State = WaveState;
    type Msg = u64;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, u64>, _: &mut NodeRng) -> (WaveState, Status) {
        if self.short[ctx.id] {
            out.broadcast(ctx.label);
            (WaveState::default(), Status::Halted)
        } else {
            (WaveState::default(), Status::Running)
        }
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        s: &mut WaveState,
        _: usize,
        inbox: &Inbox<'_, u64>,
        out: &mut Outbox<'_, u64>,
        _: &mut NodeRng,
    ) -> Status {
        let ports = ctx.ports();
        let best = inbox.iter().min_by_key(|&(i, &l)| (l, ctx.edge_label(ports[i].edge())));
        match best {
            None => Status::Running,
            Some((i, _)) => {
                s.parent = Some(ports[i].edge());
                out.broadcast(ctx.label);
                Status::Halted
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, generate, Family};

    fn sinkless(g: &Graph, o: &Orientation) -> bool {
        o.out_degrees(g).iter().all(|&d| d >= 1)
    }

    #[test]
    fn bound_values() {
        assert_eq!(short_cycle_bound(3, 4), 5);
        assert_eq!(short_cycle_bound(3, 1024), 21);
        assert_eq!(short_cycle_bound(4, 9), 5);
    }

    #[test]
    fn clique_of_four() {
        let g = clique(4).unwrap();
        let (o, m, diag) = deterministic_sinkless_with(&g, 3, CycleOrder::ShortestFirst, &Labels::default()).unwrap();
        assert!(sinkless(&g, &o));
        assert!(diag.short_node.iter().all(|&s| s));
        assert_eq!(m.rounds, 3);
    }

    #[test]
    fn half_edge_stars_take_no_rounds() {
        let g = Graph::new(4, (0..4).flat_map(|v| std::iter::repeat_n((v, None), 3))).unwrap();
        let (o, m) = deterministic_sinkless(&g, 3).unwrap();
        assert!(sinkless(&g, &o));
        assert_eq!(m.rounds, 0);
    }

    #[test]
    fn low_degree_is_rejected() {
        let g = clique(4).unwrap();
        assert!(matches!(deterministic_sinkless(&g, 4), Err(Error::Precondition(_))));
        assert!(matches!(deterministic_sinkless(&g, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn centralized_and_local_agree() {
        for (seed, order) in [(1, CycleOrder::ShortestFirst), (2, CycleOrder::Lexicographic), (3, CycleOrder::ShortestFirst)] {
            let g = generate(&Family::Regular { n: 30, delta: 3 }, seed).unwrap();
            let (a, ma, _) = deterministic_sinkless_with(&g, 3, order, &Labels::default()).unwrap();
            let (b, mb) = deterministic_sinkless_local(&g, 3, order).unwrap();
            assert_eq!(a, b);
            assert_eq!(ma.rounds, mb.rounds);
            assert!(sinkless(&g, &a));
        }
    }

    #[test]
    fn regular_graphs_are_oriented_sinklessly() {
        for seed in 0..5 {
            for delta in [3, 4, 7] {
                let g = generate(&Family::Regular { n: 200, delta }, seed).unwrap();
                let (o, m) = deterministic_sinkless(&g, delta).unwrap();
                assert!(sinkless(&g, &o));
                assert!(m.rounds <= 2 * short_cycle_bound(delta, 200));
            }
        }
    }
}
