//! Randomized pre-shattering: orient most of the graph with random marks and
//! leave small components of bad nodes behind.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId, Subgraph};
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};

pub const MARK_PROBABILITY: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeType {
    Good,
    /// More than half of the incident edges marked.
    TypeI,
    /// Next to a type I node.
    TypeII,
    /// No outgoing marked edge.
    TypeIII,
}

impl NodeType {
    pub fn is_bad(self) -> bool {
        self != NodeType::Good
    }
}

#[derive(Clone, Debug)]
pub struct ShatterResult {
    /// Tail of every edge decided here; `None` for residual edges.
    pub partial: Vec<Option<NodeId>>,
    pub node_type: Vec<NodeType>,
    /// Marks after unmarking the edges of type I nodes.
    pub marked: Vec<bool>,
    /// Bad nodes with their undecided edges; edges to good nodes are
    /// half-edges.
    pub residual: Subgraph,
    /// Largest connected piece of the graph induced by the bad nodes.
    pub max_bad_component: usize,
    pub metrics: RunMetrics,
}

#[derive(Clone, Debug)]
enum Msg {
    Draw { label: u64, marked: bool, tail: bool },
    TypeI(bool),
    Bad(bool),
}

#[derive(Debug, Default)]
struct PortState {
    /// The draw this node made; replaced by the winning draw in round 1.
    marked: bool,
    tail_here: bool,
    other_type_i: bool,
    other_bad: bool,
}

#[derive(Debug)]
struct State {
    ports: Vec<PortState>,
    ty: NodeType,
}

struct Marking {
    p: f64,
}

impl NodeProgram for Marking {
    type State = State;
    type Msg = Msg;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Msg>, rng: &mut NodeRng) -> (State, Status) {
        let mut ports = Vec::with_capacity(ctx.degree());
        for (i, p) in ctx.ports().iter().enumerate() {
            let mut ps = PortState::default();
            if p.other().is_some() {
                ps.marked = rng.random_bool(self.p);
                ps.tail_here = rng.random_bool(0.5);
                out.send(i, Msg::Draw { label: ctx.label, marked: ps.marked, tail: ps.tail_here });
            } else {
                ps.tail_here = true;
            }
            ports.push(ps);
        }
        (State { ports, ty: NodeType::Good }, Status::Running)
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        s: &mut State,
        round: usize,
        inbox: &Inbox<'_, Msg>,
        out: &mut Outbox<'_, Msg>,
        _: &mut NodeRng,
    ) -> Status {
        match round {
            1 => {
                // the draw of the endpoint with the smaller label stands
                for (i, m) in inbox.iter() {
                    if let Msg::Draw { label, marked, tail } = *m {
                        if label < ctx.label {
                            s.ports[i].marked = marked;
                            s.ports[i].tail_here = !tail;
                        }
                    }
                }
                let marked = s.ports.iter().filter(|p| p.marked).count();
                let type_i = 2 * marked > ctx.degree();
                if type_i {
                    s.ty = NodeType::TypeI;
                }
                for (i, p) in ctx.ports().iter().enumerate() {
                    if p.other().is_some() {
                        out.send(i, Msg::TypeI(type_i));
                    }
                }
                Status::Running
            }
            2 => {
                for (i, m) in inbox.iter() {
                    if let Msg::TypeI(t) = *m {
                        s.ports[i].other_type_i = t;
                    }
                }
                if s.ty != NodeType::TypeI {
                    let satisfied = ctx
                        .ports()
                        .iter()
                        .zip(&s.ports)
                        .any(|(p, ps)| p.other().is_none() || (ps.marked && ps.tail_here));
                    if s.ports.iter().any(|p| p.other_type_i) {
                        s.ty = NodeType::TypeII;
                    } else if !satisfied {
                        s.ty = NodeType::TypeIII;
                    }
                }
                let bad = s.ty.is_bad();
                for (i, p) in ctx.ports().iter().enumerate() {
                    if p.other().is_some() {
                        out.send(i, Msg::Bad(bad));
                    }
                }
                Status::Running
            }
            _ => {
                for (i, m) in inbox.iter() {
                    if let Msg::Bad(b) = *m {
                        s.ports[i].other_bad = b;
                    }
                }
                Status::Halted
            }
        }
    }
}

pub fn pre_shatter(g: &Graph, seed: u64) -> Result<ShatterResult> {
    pre_shatter_with(g, seed, MARK_PROBABILITY)
}

pub fn pre_shatter_with(g: &Graph, seed: u64, mark_probability: f64) -> Result<ShatterResult> {
    if !(0.0..=1.0).contains(&mark_probability) {
        return Err(param(format!("mark probability {mark_probability} outside [0, 1]")));
    }
    let delta = g.max_degree();
    if !g.is_regular(delta) {
        return Err(Error::InvalidGraph("pre-shattering needs a regular graph".into()));
    }
    let engine = Engine::new(g);
    let out = engine.run(&Marking { p: mark_probability }, seed, 3)?;
    let states = out.states;
    let node_type: Vec<NodeType> = states.iter().map(|s| s.ty).collect();

    // (node, port index) of each side of every edge
    let mut at: Vec<[(NodeId, usize); 2]> = vec![[(usize::MAX, 0); 2]; g.m()];
    for v in 0..g.n() {
        for (i, p) in g.ports(v).iter().enumerate() {
            at[p.edge()][g.side(p.edge(), v)] = (v, i);
        }
    }

    let mut partial = vec![None; g.m()];
    let mut marked = vec![false; g.m()];
    let mut residual_ends: Vec<(NodeId, Option<NodeId>)> = Vec::new();
    let mut residual_edges: Vec<EdgeId> = Vec::new();
    for (e, a, b) in g.edges() {
        let bad_a = node_type[a].is_bad();
        let Some(b) = b else {
            if bad_a {
                residual_ends.push((a, None));
                residual_edges.push(e);
            } else {
                partial[e] = Some(a);
            }
            continue;
        };
        let (_, ia) = at[e][0];
        let pa = &states[a].ports[ia];
        // a's view of the edge decides it
        let bad_b = pa.other_bad;
        let at_type_i = node_type[a] == NodeType::TypeI || pa.other_type_i;
        if pa.marked && !at_type_i {
            marked[e] = true;
            partial[e] = Some(if pa.tail_here { a } else { b });
            continue;
        }
        match (bad_a, bad_b) {
            (false, false) => partial[e] = Some(a.min(b)),
            (true, false) => {
                residual_ends.push((a, None));
                residual_edges.push(e);
            }
            (false, true) => {
                residual_ends.push((b, None));
                residual_edges.push(e);
            }
            (true, true) => {
                residual_ends.push((a, Some(b)));
                residual_edges.push(e);
            }
        }
    }

    let bad: Vec<NodeId> = (0..g.n()).filter(|&v| node_type[v].is_bad()).collect();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in bad.iter().enumerate() {
        local[v] = i;
    }
    let residual_graph = Graph::new(bad.len(), residual_ends.iter().map(|&(a, b)| (local[a], b.map(|b| local[b]))))?;
    let max_bad_component = g.induced(&bad, false).graph.components().largest();

    let mut metrics = RunMetrics::phase("mark", 1, 2 * (g.m() - half_edges(g)) as u64);
    metrics.then("classify", out.metrics.rounds - 1, out.metrics.messages - metrics.messages);
    metrics.max_bad_component = Some(max_bad_component);

    Ok(ShatterResult {
        partial,
        node_type,
        marked,
        residual: Subgraph { graph: residual_graph, node_of: bad, edge_of: residual_edges },
        max_bad_component,
        metrics,
    })
}

fn half_edges(g: &Graph) -> usize {
    (0..g.m()).filter(|&e| g.is_half(e)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{generate, Family};

    /// Checks the claims the residual is built on.
    fn check(g: &Graph, r: &ShatterResult) {
        let delta = g.max_degree();
        let mut out = vec![0usize; g.n()];
        for e in 0..g.m() {
            if let Some(t) = r.partial[e] {
                out[t] += 1;
            }
        }
        for v in 0..g.n() {
            if !r.node_type[v].is_bad() {
                assert!(out[v] >= 1, "good node {v} has no outgoing edge");
            }
        }
        for (i, &v) in r.residual.node_of.iter().enumerate() {
            assert!(r.node_type[v].is_bad());
            assert!(2 * r.residual.graph.degree(i) >= delta, "bad node {v} kept too few edges");
        }
        // every edge is decided exactly once
        let mut seen = vec![false; g.m()];
        for &e in &r.residual.edge_of {
            assert!(r.partial[e].is_none());
            seen[e] = true;
        }
        assert!((0..g.m()).all(|e| seen[e] || r.partial[e].is_some()));
    }

    #[test]
    fn claims_hold_on_random_regular_graphs() {
        for seed in 0..10 {
            let g = generate(&Family::Regular { n: 300, delta: 16 }, seed).unwrap();
            let r = pre_shatter(&g, seed).unwrap();
            check(&g, &r);
            assert_eq!(r.metrics.rounds, 3);
        }
    }

    #[test]
    fn no_marks_makes_everything_bad() {
        let g = generate(&Family::Regular { n: 6, delta: 3 }, 0).unwrap();
        let seed = (0..1000).find(|&s| pre_shatter(&g, s).unwrap().marked.iter().all(|m| !m)).unwrap();
        let r = pre_shatter(&g, seed).unwrap();
        check(&g, &r);
        assert!(r.node_type.iter().all(|&t| t == NodeType::TypeIII));
        assert_eq!(r.residual.graph.m(), g.m());
        assert_eq!(r.residual.node_of, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn everything_marked_leaves_good_nodes_satisfied() {
        let g = generate(&Family::Regular { n: 40, delta: 4 }, 3).unwrap();
        let r = pre_shatter_with(&g, 5, 1.0).unwrap();
        // every node is type I, so all marks are withdrawn
        assert!(r.node_type.iter().all(|&t| t == NodeType::TypeI));
        assert!(r.marked.iter().all(|m| !m));
        check(&g, &r);
    }

    #[test]
    fn irregular_input_is_rejected() {
        let g = Graph::new(3, [(0, Some(1)), (1, Some(2))]).unwrap();
        assert!(pre_shatter(&g, 0).is_err());
    }

    #[test]
    fn half_edges_count_as_outgoing() {
        // a 3-regular structure built from a triangle with one half-edge each
        let g = Graph::new(3, [(0, Some(1)), (1, Some(2)), (2, Some(0)), (0, None), (1, None), (2, None)]).unwrap();
        let r = pre_shatter_with(&g, 1, 0.0).unwrap();
        assert!(r.node_type.iter().all(|&t| t == NodeType::Good));
        check(&g, &r);
    }
}
