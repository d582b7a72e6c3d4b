//! Synchronous message-passing simulator.
//!
//! A round is: deliver every message queued in the previous round, then let
//! each running node compute on its inbox and queue new messages. `init`
//! queues the messages for round 1, so a program that only talks once and
//! stops takes one round, and one that stops in `init` takes none.
//!
//! Randomness is drawn from a counter-based generator keyed by
//! `(seed, round)` with the node label as stream, so a run does not depend
//! on the order nodes are visited.

pub mod ball;
pub mod mis;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{EdgeId, Graph, NodeId, Port};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
}

pub struct NodeCtx<'a> {
    pub id: NodeId,
    pub label: u64,
    pub graph: &'a Graph,
    edge_labels: Option<&'a [u64]>,
}

impl NodeCtx<'_> {
    pub fn ports(&self) -> &[Port] {
        self.graph.ports(self.id)
    }

    pub fn degree(&self) -> usize {
        self.graph.degree(self.id)
    }

    pub fn edge_label(&self, e: EdgeId) -> u64 {
        self.edge_labels.map_or(e as u64, |l| l[e])
    }
}

pub struct Outbox<'a, M> {
    slots: &'a mut [Option<M>],
    base: usize,
    written: &'a mut Vec<u32>,
}

impl<M> Outbox<'_, M> {
    /// Queues `m` on the node's `i`-th port, replacing anything queued there.
    pub fn send(&mut self, i: usize, m: M) {
        if self.slots[i].is_none() {
            self.written.push((self.base + i) as u32);
        }
        self.slots[i] = Some(m);
    }

    pub fn broadcast(&mut self, m: M)
    where
        M: Clone,
    {
        for i in 0..self.slots.len() {
            self.send(i, m.clone());
        }
    }
}

pub struct Inbox<'a, M> {
    slots: &'a [Option<M>],
}

impl<M> Inbox<'_, M> {
    pub fn get(&self, i: usize) -> Option<&M> {
        self.slots[i].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &M)> {
        self.slots.iter().enumerate().filter_map(|(i, m)| m.as_ref().map(|m| (i, m)))
    }
}

/// Per-node generator, built on first use.
pub struct NodeRng {
    key: [u8; 32],
    stream: u64,
    inner: Option<ChaCha8Rng>,
}

impl NodeRng {
    pub fn new(seed: u64, round: usize, label: u64) -> NodeRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(round as u64).to_le_bytes());
        key[16..24].copy_from_slice(b"degsplit");
        NodeRng { key, stream: label, inner: None }
    }

    fn get(&mut self) -> &mut ChaCha8Rng {
        self.inner.get_or_insert_with(|| {
            let mut r = ChaCha8Rng::from_seed(self.key);
            r.set_stream(self.stream);
            r
        })
    }
}

impl RngCore for NodeRng {
    fn next_u32(&mut self) -> u32 {
        self.get().next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.get().next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.get().fill_bytes(dst)
    }
}

pub trait NodeProgram {
    type State;
    type Msg;

    fn init(
        &self,
        ctx: &NodeCtx<'_>,
        out: &mut Outbox<'_, Self::Msg>,
        rng: &mut NodeRng,
    ) -> (Self::State, Status);

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        state: &mut Self::State,
        round: usize,
        inbox: &Inbox<'_, Self::Msg>,
        out: &mut Outbox<'_, Self::Msg>,
        rng: &mut NodeRng,
    ) -> Status;
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub phase: String,
    pub rounds: usize,
    pub messages: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rounds: usize,
    pub messages: u64,
    pub phases: Vec<PhaseMetrics>,
    pub max_bad_component: Option<usize>,
}

impl RunMetrics {
    pub fn phase(name: &str, rounds: usize, messages: u64) -> RunMetrics {
        RunMetrics {
            rounds,
            messages,
            phases: vec![PhaseMetrics { phase: name.to_string(), rounds, messages }],
            max_bad_component: None,
        }
    }

    /// Appends a phase that ran after everything recorded so far.
    pub fn then(&mut self, name: &str, rounds: usize, messages: u64) {
        self.rounds += rounds;
        self.messages += messages;
        self.phases.push(PhaseMetrics { phase: name.to_string(), rounds, messages });
    }

    /// Sequential composition.
    pub fn append(&mut self, other: RunMetrics) {
        self.rounds += other.rounds;
        self.messages += other.messages;
        self.phases.extend(other.phases);
        self.max_bad_component = match (self.max_bad_component, other.max_bad_component) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    /// Composition of runs on disjoint parts executed side by side: rounds
    /// take the maximum, messages add up.
    pub fn parallel(&mut self, other: &RunMetrics) {
        self.rounds = self.rounds.max(other.rounds);
        self.messages += other.messages;
    }

    /// JSON-lines log, one `{phase, rounds, messages}` object per phase.
    pub fn log_lines(&self) -> String {
        let mut s = String::new();
        for p in &self.phases {
            s.push_str(&serde_json::to_string(p).expect("serialization cannot fail"));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug)]
pub struct RunOutput<S> {
    pub states: Vec<S>,
    pub metrics: RunMetrics,
}

#[derive(Debug, thiserror::Error)]
#[error("round limit {limit} reached with {active} nodes still running")]
pub struct Timeout<S: std::fmt::Debug> {
    pub limit: usize,
    pub active: usize,
    pub partial: RunOutput<S>,
}

impl<S: std::fmt::Debug> From<Timeout<S>> for Error {
    fn from(t: Timeout<S>) -> Error {
        Error::Timeout { limit: t.limit, active: t.active }
    }
}

const NO_PORT: u32 = u32::MAX;

/// A graph prepared for simulation.
pub struct Engine<'g> {
    graph: &'g Graph,
    twin: Vec<u32>,
    node_labels: Option<Vec<u64>>,
    edge_labels: Option<Vec<u64>>,
}

impl<'g> Engine<'g> {
    pub fn new(graph: &'g Graph) -> Engine<'g> {
        let mut first = vec![NO_PORT; graph.m()];
        let mut twin = vec![NO_PORT; graph.port_count()];
        for v in 0..graph.n() {
            let base = graph.port_base(v);
            for (i, p) in graph.ports(v).iter().enumerate() {
                if p.other().is_none() {
                    continue;
                }
                let here = (base + i) as u32;
                let e = p.edge();
                if first[e] == NO_PORT {
                    first[e] = here;
                } else {
                    twin[here as usize] = first[e];
                    twin[first[e] as usize] = here;
                }
            }
        }
        Engine { graph, twin, node_labels: None, edge_labels: None }
    }

    /// Replaces node and edge ids as seen by programs and as random streams.
    pub fn with_labels(mut self, nodes: Vec<u64>, edges: Vec<u64>) -> Engine<'g> {
        assert_eq!(nodes.len(), self.graph.n());
        assert_eq!(edges.len(), self.graph.m());
        self.node_labels = Some(nodes);
        self.edge_labels = Some(edges);
        self
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    fn ctx(&self, v: NodeId) -> NodeCtx<'_> {
        NodeCtx {
            id: v,
            label: self.node_labels.as_ref().map_or(v as u64, |l| l[v]),
            graph: self.graph,
            edge_labels: self.edge_labels.as_deref(),
        }
    }

    pub fn run<P>(&self, prog: &P, seed: u64, max_rounds: usize) -> Result<RunOutput<P::State>, Timeout<P::State>>
    where
        P: NodeProgram,
        P::State: std::fmt::Debug,
    {
        let g = self.graph;
        let n = g.n();
        let ports = g.port_count();
        let mut outbox: Vec<Option<P::Msg>> = (0..ports).map(|_| None).collect();
        let mut inbox: Vec<Option<P::Msg>> = (0..ports).map(|_| None).collect();
        let mut written: Vec<u32> = Vec::new();
        let mut delivered: Vec<u32> = Vec::new();
        let mut states = Vec::with_capacity(n);
        let mut running = vec![false; n];
        let mut active = 0usize;

        for v in 0..n {
            let ctx = self.ctx(v);
            let base = g.port_base(v);
            let mut out = Outbox { slots: &mut outbox[base..base + g.degree(v)], base, written: &mut written };
            let mut rng = NodeRng::new(seed, 0, ctx.label);
            let (s, status) = prog.init(&ctx, &mut out, &mut rng);
            states.push(s);
            if status == Status::Running {
                running[v] = true;
                active += 1;
            }
        }

        let mut metrics = RunMetrics::default();
        let mut round = 0usize;
        while active > 0 {
            if round == max_rounds {
                metrics.rounds = round;
                return Err(Timeout {
                    limit: max_rounds,
                    active,
                    partial: RunOutput { states, metrics },
                });
            }
            round += 1;
            for &p in &written {
                let msg = outbox[p as usize].take();
                let q = self.twin[p as usize];
                if q != NO_PORT {
                    metrics.messages += 1;
                    inbox[q as usize] = msg;
                    delivered.push(q);
                }
            }
            written.clear();
            for v in 0..n {
                if !running[v] {
                    continue;
                }
                let ctx = self.ctx(v);
                let base = g.port_base(v);
                let deg = g.degree(v);
                let ib = Inbox { slots: &inbox[base..base + deg] };
                let mut out = Outbox { slots: &mut outbox[base..base + deg], base, written: &mut written };
                let mut rng = NodeRng::new(seed, round, ctx.label);
                if prog.step(&ctx, &mut states[v], round, &ib, &mut out, &mut rng) == Status::Halted {
                    running[v] = false;
                    active -= 1;
                }
            }
            for &q in &delivered {
                inbox[q as usize] = None;
            }
            delivered.clear();
        }
        metrics.rounds = round;
        Ok(RunOutput { states, metrics })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, cycle};
    use rand::Rng;

    /// Every node learns the maximum label by repeated exchange; stops once
    /// nothing changed for `n` rounds.
    struct FloodMax {
        n: usize,
    }

    #[derive(Debug)]
    struct Seen {
        best: u64,
        quiet: usize,
    }

    impl NodeProgram for FloodMax {
        type State = Seen;
        type Msg = u64;

        fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, u64>, _: &mut NodeRng) -> (Seen, Status) {
            out.broadcast(ctx.label);
            (Seen { best: ctx.label, quiet: 0 }, Status::Running)
        }

        fn step(
            &self,
            _: &NodeCtx<'_>,
            s: &mut Seen,
            _: usize,
            inbox: &Inbox<'_, u64>,
            out: &mut Outbox<'_, u64>,
            _: &mut NodeRng,
        ) -> Status {
            let best = inbox.iter().map(|(_, &m)| m).max().unwrap_or(0).max(s.best);
            if best > s.best {
                s.best = best;
                s.quiet = 0;
            } else {
                s.quiet += 1;
            }
            if s.quiet >= self.n {
                return Status::Halted;
            }
            out.broadcast(s.best);
            Status::Running
        }
    }

    struct Silent;

    impl NodeProgram for Silent {
        type State = ();
        type Msg = ();
        fn init(&self, _: &NodeCtx<'_>, _: &mut Outbox<'_, ()>, _: &mut NodeRng) -> ((), Status) {
            ((), Status::Halted)
        }
        fn step(&self, _: &NodeCtx<'_>, _: &mut (), _: usize, _: &Inbox<'_, ()>, _: &mut Outbox<'_, ()>, _: &mut NodeRng) -> Status {
            unreachable!()
        }
    }

    /// Draws a coin in `init`, tells the neighbors, stops after hearing back.
    struct OneShot;

    impl NodeProgram for OneShot {
        type State = (bool, Vec<bool>);
        type Msg = bool;
        fn init(&self, _: &NodeCtx<'_>, out: &mut Outbox<'_, bool>, rng: &mut NodeRng) -> (Self::State, Status) {
            let coin = rng.random_bool(0.5);
            out.broadcast(coin);
            ((coin, Vec::new()), Status::Running)
        }
        fn step(
            &self,
            _: &NodeCtx<'_>,
            s: &mut Self::State,
            _: usize,
            inbox: &Inbox<'_, bool>,
            _: &mut Outbox<'_, bool>,
            _: &mut NodeRng,
        ) -> Status {
            s.1 = inbox.iter().map(|(_, &b)| b).collect();
            Status::Halted
        }
    }

    #[test]
    fn halting_in_init_takes_zero_rounds() {
        let g = cycle(5).unwrap();
        let out = Engine::new(&g).run(&Silent, 0, 10).unwrap();
        assert_eq!(out.metrics.rounds, 0);
        assert_eq!(out.metrics.messages, 0);
    }

    #[test]
    fn one_exchange_takes_one_round() {
        let g = clique(4).unwrap();
        let out = Engine::new(&g).run(&OneShot, 3, 10).unwrap();
        assert_eq!(out.metrics.rounds, 1);
        assert_eq!(out.metrics.messages, 12);
        // each node saw exactly the neighbors' coins
        for v in 0..4 {
            let mut expect: Vec<bool> = g.ports(v).iter().map(|p| out.states[p.other().unwrap()].0).collect();
            let mut got = out.states[v].1.clone();
            expect.sort();
            got.sort();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn flood_max_on_cycle() {
        let g = cycle(8).unwrap();
        let prog = FloodMax { n: 8 };
        let out = Engine::new(&g).run(&prog, 0, 100).unwrap();
        assert!(out.states.iter().all(|s| s.best == 7));
        // information needs at most the diameter, then `n` quiet rounds
        assert!(out.metrics.rounds <= 4 + 8);
    }

    #[test]
    fn timeout_returns_partial_state() {
        let g = cycle(8).unwrap();
        let err = Engine::new(&g).run(&FloodMax { n: 8 }, 0, 3).unwrap_err();
        assert_eq!(err.limit, 3);
        assert_eq!(err.partial.metrics.rounds, 3);
        assert_eq!(err.partial.states.len(), 8);
        assert!(matches!(Error::from(err), Error::Timeout { limit: 3, .. }));
    }

    #[test]
    fn randomness_depends_on_seed_and_label_only() {
        let g = cycle(6).unwrap();
        let a = Engine::new(&g).run(&OneShot, 11, 5).unwrap();
        let b = Engine::new(&g).run(&OneShot, 11, 5).unwrap();
        let coins = |o: &RunOutput<(bool, Vec<bool>)>| o.states.iter().map(|s| s.0).collect::<Vec<_>>();
        assert_eq!(coins(&a), coins(&b));
        let relabeled = Engine::new(&g).with_labels((0..6).rev().collect(), (0..6).collect());
        let c = relabeled.run(&OneShot, 11, 5).unwrap();
        let ca = coins(&a);
        let cc = coins(&c);
        for v in 0..6 {
            assert_eq!(cc[v], ca[5 - v]);
        }
    }

    #[test]
    fn half_edges_carry_nothing() {
        let g = Graph::new(2, [(0, Some(1)), (0, None)]).unwrap();
        let out = Engine::new(&g).run(&OneShot, 1, 5).unwrap();
        assert_eq!(out.metrics.messages, 2);
        assert_eq!(out.states[0].1.len(), 1);
    }

    #[test]
    fn metrics_compose() {
        let mut m = RunMetrics::phase("a", 3, 10);
        m.then("b", 2, 1);
        assert_eq!(m.rounds, 5);
        let line = m.log_lines();
        assert_eq!(line.lines().next().unwrap(), r#"{"phase":"a","rounds":3,"messages":10}"#);
    }
}
