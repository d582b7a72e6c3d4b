//! `(4 + eps) D` edge coloring: random edge partition, cheap coloring of
//! the well-behaved parts, and a fine coloring of what is left around
//! overloaded nodes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::PaletteColoring;
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};

use super::base::base_color_with;
use super::fine::{fine_color, FineConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomizedColorConfig {
    pub min_delta: usize,
    /// Largest bad component tolerated; unbounded by default.
    pub component_cap: Option<usize>,
    /// Replaces the computed number of parts.
    pub parts: Option<usize>,
    pub fine: FineConfig,
}

impl Default for RandomizedColorConfig {
    fn default() -> Self {
        RandomizedColorConfig { min_delta: 64, component_cap: None, parts: None, fine: FineConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct RandomizedColorReport {
    pub parts: usize,
    pub type_one: usize,
    pub bad: usize,
    pub max_bad_component: usize,
    /// Colors reserved for the well-behaved parts; the rest is the second half.
    pub first_half: usize,
}

/// Number of parts `max(1, floor(eps'^2 D / (18 ln D)))` with `eps' = eps / 4`.
pub fn part_count(delta: usize, eps: f64) -> usize {
    let e = eps / 4.0;
    if delta < 2 {
        return 1;
    }
    ((e * e * delta as f64 / (18.0 * (delta as f64).ln())).floor() as usize).max(1)
}

#[derive(Clone, Debug)]
enum Msg {
    Part(u32),
    Overloaded(bool),
}

#[derive(Debug, Default)]
struct State {
    part: Vec<u32>,
    type_one: bool,
    next_to_type_one: bool,
}

struct Partition {
    parts: usize,
    /// Degree in one part at which a node is overloaded.
    limit: f64,
}

impl NodeProgram for Partition {
    type State = State;
    type Msg = Msg;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Msg>, rng: &mut NodeRng) -> (State, Status) {
        let mut part = Vec::with_capacity(ctx.degree());
        for (i, p) in ctx.ports().iter().enumerate() {
            let k = rng.random_range(0..self.parts as u32);
            part.push(k);
            if p.other().is_some_and(|w| ctx.id < w) {
                out.send(i, Msg::Part(k));
            }
        }
        (State { part, ..State::default() }, Status::Running)
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
        if round == 1 {
            for (i, m) in inbox.iter() {
                if let Msg::Part(k) = m {
                    s.part[i] = *k;
                }
            }
            let mut deg = vec![0usize; self.parts];
            for &k in &s.part {
                deg[k as usize] += 1;
            }
            s.type_one = deg.iter().any(|&d| d as f64 >= self.limit);
            for (i, p) in ctx.ports().iter().enumerate() {
                if p.other().is_some() {
                    out.send(i, Msg::Overloaded(s.type_one));
                }
            }
            Status::Running
        } else {
            s.next_to_type_one = inbox.iter().any(|(_, m)| matches!(m, Msg::Overloaded(true)));
            Status::Halted
        }
    }
}

pub fn randomized_color(
    g: &Graph,
    eps: f64,
    seed: u64,
    cfg: &RandomizedColorConfig,
) -> Result<(PaletteColoring, RunMetrics, RandomizedColorReport)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let delta = g.max_degree();
    if delta < cfg.min_delta {
        return Err(param(format!("maximum degree {delta} is below the minimum {}", cfg.min_delta)));
    }
    let e = eps / 4.0;
    let half = (2.0 * (1.0 + e) * delta as f64).floor() as usize;
    let x = cfg.parts.unwrap_or_else(|| part_count(delta, eps)).max(1);
    let block = half / x;
    let limit = (1.0 + e) * delta as f64 / x as f64;

    let run = Engine::new(g).run(&Partition { parts: x, limit }, seed, 2)?;
    let mut metrics = RunMetrics::phase("partition", run.metrics.rounds, run.metrics.messages);
    let states = run.states;
    let mut part_of = vec![0u32; g.m()];
    for v in 0..g.n() {
        for (p, &k) in g.ports(v).iter().zip(&states[v].part) {
            if g.side(p.edge(), v) == 0 {
                part_of[p.edge()] = k;
            }
        }
    }
    let type_one: Vec<bool> = states.iter().map(|s| s.type_one).collect();
    let bad: Vec<usize> = (0..g.n()).filter(|&v| states[v].type_one || states[v].next_to_type_one).collect();
    let max_bad_component = g.induced(&bad, false).graph.components().largest();
    if let Some(cap) = cfg.component_cap {
        if max_bad_component > cap {
            return Err(Error::ComponentTooLarge { size: max_bad_component, cap });
        }
    }

    let mut colors = vec![u32::MAX; g.m()];
    let mut groups: Vec<Vec<EdgeId>> = vec![Vec::new(); x];
    let mut rest: Vec<EdgeId> = Vec::new();
    for (e, a, b) in g.edges() {
        if type_one[a] || b.is_some_and(|b| type_one[b]) {
            rest.push(e);
        } else {
            groups[part_of[e] as usize].push(e);
        }
    }
    let mut good = RunMetrics::default();
    for (i, edges) in groups.iter().enumerate() {
        let sub = g.edge_subgraph(edges);
        let need = (2 * sub.max_degree()).saturating_sub(1);
        if need > block {
            return Err(Error::Invariant(format!("part {i} needs {need} colors, block holds {block}")));
        }
        let (col, m) = base_color_with(&sub, block, seed ^ ((i as u64 + 1) << 32))?;
        good.parallel(&m);
        for (k, &e) in edges.iter().enumerate() {
            colors[e] = (i * block) as u32 + col.colors[k];
        }
    }
    metrics.then("good-parts", good.rounds, good.messages);

    if !rest.is_empty() {
        let sub = g.edge_subgraph(&rest);
        let (col, m) = fine_color(&sub, e, &cfg.fine)?;
        if col.palette_size > half {
            return Err(Error::Invariant(format!("second half needs {} colors of {half}", col.palette_size)));
        }
        metrics.then("bad-components", m.rounds, m.messages);
        for (k, &edge) in rest.iter().enumerate() {
            colors[edge] = half as u32 + col.colors[k];
        }
    }
    metrics.max_bad_component = Some(max_bad_component);
    let report = RandomizedColorReport {
        parts: x,
        type_one: type_one.iter().filter(|&&t| t).count(),
        bad: bad.len(),
        max_bad_component,
        first_half: half,
    };
    Ok((PaletteColoring { palette_size: 2 * half, colors }, metrics, report))
}
