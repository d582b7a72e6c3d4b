//! Sinkless orientation: every node gets at least one outgoing edge.

pub mod cycles;
pub mod deterministic;
pub mod gather;
pub mod high;
pub mod low;
pub mod shatter;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cycles::CycleOrder;
pub use deterministic::{deterministic_sinkless, deterministic_sinkless_local, deterministic_sinkless_with};
pub use gather::sinkless_by_gathering;
pub use high::{regularize, sinkless_high_degree};
pub use low::sinkless_low_degree;
pub use shatter::{pre_shatter, pre_shatter_with, NodeType, ShatterResult};

use crate::artifact::Orientation;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinklessConfig {
    /// Random orientation is tried first when the minimum degree is at
    /// least this times `ln n`.
    pub fast_path_c1: f64,
    /// Minimum degree above which shattering is used directly.
    pub high_degree_threshold: usize,
    pub mark_probability: f64,
    pub order: CycleOrder,
}

impl Default for SinklessConfig {
    fn default() -> Self {
        SinklessConfig {
            fast_path_c1: 4.0,
            high_degree_threshold: 500,
            mark_probability: shatter::MARK_PROBABILITY,
            order: CycleOrder::ShortestFirst,
        }
    }
}

pub fn sinkless_dispatch(g: &Graph, seed: u64) -> Result<(Orientation, RunMetrics)> {
    sinkless_dispatch_with(g, seed, &SinklessConfig::default())
}

pub fn sinkless_dispatch_with(g: &Graph, seed: u64, cfg: &SinklessConfig) -> Result<(Orientation, RunMetrics)> {
    let d = g.min_degree();
    if d < 3 {
        return Err(Error::Precondition(format!("minimum degree {d} is below 3")));
    }
    let mut metrics = RunMetrics::default();
    if d as f64 >= cfg.fast_path_c1 * (g.n() as f64).ln() {
        let (o, m) = random_orientation(g, seed)?;
        metrics.append(m);
        if is_sinkless(g, &o) {
            return Ok((o, metrics));
        }
    }
    let (o, m) = if d > cfg.high_degree_threshold {
        sinkless_high_degree(g, d, seed, cfg)?
    } else {
        sinkless_low_degree(g, d, seed, cfg)?
    };
    metrics.append(m);
    if !is_sinkless(g, &o) {
        return Err(Error::Invariant("orientation has a sink".into()));
    }
    Ok((o, metrics))
}

fn is_sinkless(g: &Graph, o: &Orientation) -> bool {
    o.out_degrees(g).iter().all(|&k| k >= 1)
}

/// Every edge oriented by a fair coin of its lower-labelled endpoint.
pub fn random_orientation(g: &Graph, seed: u64) -> Result<(Orientation, RunMetrics)> {
    let out = Engine::new(g).run(&Coins, seed, 1)?;
    let mut tail: Vec<NodeId> = Vec::with_capacity(g.m());
    let mut port = vec![0usize; g.n()];
    let mut at = vec![usize::MAX; g.m()];
    for v in 0..g.n() {
        for p in g.ports(v) {
            if g.side(p.edge(), v) == 0 {
                at[p.edge()] = port[v];
            }
            port[v] += 1;
        }
    }
    for (e, a, b) in g.edges() {
        let here = out.states[a][at[e]];
        tail.push(match b {
            Some(b) if !here => b,
            _ => a,
        });
    }
    let metrics = RunMetrics::phase("random-orientation", out.metrics.rounds, out.metrics.messages);
    Ok((Orientation::from_tails(tail), metrics))
}

struct Coins;

impl NodeProgram for Coins {
    /// Per port: whether this node is the tail.
    type State = Vec<bool>;
    type Msg = (u64, bool);

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, (u64, bool)>, rng: &mut NodeRng) -> (Vec<bool>, Status) {
        let mut mine = Vec::with_capacity(ctx.degree());
        for (i, p) in ctx.ports().iter().enumerate() {
            if p.other().is_some() {
                let coin = rng.random_bool(0.5);
                out.send(i, (ctx.label, coin));
                mine.push(coin);
            } else {
                mine.push(true);
            }
        }
        (mine, Status::Running)
    }

    fn step(
        &self,
        ctx: &NodeCtx<'_>,
        s: &mut Vec<bool>,
        _: usize,
        inbox: &Inbox<'_, (u64, bool)>,
        _: &mut Outbox<'_, (u64, bool)>,
        _: &mut NodeRng,
    ) -> Status {
        for (i, &(label, coin)) in inbox.iter() {
            if label < ctx.label {
                s[i] = !coin;
            }
        }
        Status::Halted
    }
}
