//! Forest decomposition from a low out-degree orientation.
//!
//! Every node is active in each of `k = floor((1 + eps) a)` primary forests
//! with probability `q = (1 - eps) / (1 + eps)`. An active node gives the
//! forest one of its out-edges whose head is inactive there, so each primary
//! forest is a union of stars centered at inactive nodes. Nodes with fewer
//! than `k` out-edges are padded with dummy out-edges that are never sent
//! anywhere. The out-edges left over go by slot into pseudoforests, and each
//! pseudoforest becomes two forests by moving one edge of every cycle.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::{ForestDecomposition, Orientation};
use crate::error::{param, precondition, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};
use crate::split::{check_eps, Hypotheses};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub hypotheses: Hypotheses,
    /// Constant in the requirement `a >= c2 ln n / eps^2`.
    pub c2: f64,
    /// Fresh activations tried before giving up.
    pub attempts: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { hypotheses: Hypotheses::Enforce, c2: 1.0, attempts: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestReport {
    pub attempts: usize,
    pub primary: usize,
    /// Fewest and most primary forests a node is active in.
    pub active_min: usize,
    pub active_max: usize,
    /// Most out-edges a node had left after the primary forests.
    pub max_leftover: usize,
}

type Bits = Arc<Vec<u64>>;

fn bit(bits: &[u64], j: usize) -> bool {
    bits[j / 64] >> (j % 64) & 1 == 1
}

#[derive(Debug)]
struct Activity {
    mine: Bits,
    /// Neighbor activity by port; `None` for half-edges.
    theirs: Vec<Option<Bits>>,
}

struct Activate {
    k: usize,
    q: f64,
}

impl NodeProgram for Activate {
    type State = Activity;
    type Msg = Bits;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Bits>, rng: &mut NodeRng) -> (Activity, Status) {
        let mut words = vec![0u64; self.k.div_ceil(64).max(1)];
        for j in 0..self.k {
            if rng.random_bool(self.q) {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        let mine: Bits = Arc::new(words);
        for (i, p) in ctx.ports().iter().enumerate() {
            if p.other().is_some() {
                out.send(i, mine.clone());
            }
        }
        (Activity { mine, theirs: vec![None; ctx.degree()] }, Status::Running)
    }

    fn step(
        &self,
        _: &NodeCtx<'_>,
        s: &mut Activity,
        _: usize,
        inbox: &Inbox<'_, Bits>,
        _: &mut Outbox<'_, Bits>,
        _: &mut NodeRng,
    ) -> Status {
        for (i, b) in inbox.iter() {
            s.theirs[i] = Some(b.clone());
        }
        Status::Halted
    }
}

struct Assignment {
    forest: Vec<usize>,
    leftover: Vec<Vec<EdgeId>>,
    active: Vec<usize>,
}

/// Primary forest choice of every node, or `None` when some active forest
/// finds no free out-edge.
fn assign(g: &Graph, o: &Orientation, k: usize, states: &[Activity]) -> Option<Assignment> {
    let mut forest = vec![usize::MAX; g.m()];
    let mut leftover = Vec::with_capacity(g.n());
    let mut active = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let s = &states[v];
        // out-edges by id with the head's activity
        let mut outs: Vec<(EdgeId, Option<&Bits>)> = g
            .ports(v)
            .iter()
            .enumerate()
            .filter(|(_, p)| o.tail(p.edge()) == v)
            .map(|(i, p)| (p.edge(), s.theirs[i].as_ref()))
            .collect();
        outs.sort_unstable_by_key(|&(e, _)| e);
        let mut taken = vec![false; outs.len()];
        let mut dummies = k - outs.len();
        let mut count = 0;
        for j in (0..k).filter(|&j| bit(&s.mine, j)) {
            count += 1;
            let free = (0..outs.len()).find(|&i| !taken[i] && outs[i].1.is_none_or(|b| !bit(b, j)));
            match free {
                Some(i) => {
                    taken[i] = true;
                    forest[outs[i].0] = j;
                }
                None if dummies > 0 => dummies -= 1,
                None => return None,
            }
        }
        leftover.push(outs.iter().zip(&taken).filter(|(_, &t)| !t).map(|(&(e, _), _)| e).collect());
        active.push(count);
    }
    Some(Assignment { forest, leftover, active })
}

/// Splits a pseudoforest given as at most one out-edge per node into a
/// forest and the smallest-id edge of each cycle.
fn break_cycles(g: &Graph, o: &Orientation, edges: &[(NodeId, EdgeId)]) -> Vec<EdgeId> {
    let mut next: Vec<Option<(NodeId, EdgeId)>> = vec![None; g.n()];
    for &(v, e) in edges {
        next[v] = o.head(g, e).map(|w| (w, e));
    }
    // 0 unvisited, 1 on the current walk, 2 done
    let mut state = vec![0u8; g.n()];
    let mut cut = Vec::new();
    for &(start, _) in edges {
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            match next[v] {
                Some((w, _)) => v = w,
                None => break,
            }
        }
        if state[v] == 1 && next[v].is_some() {
            // v closes a cycle that runs along the walk from v
            let mut best = usize::MAX;
            let mut u = v;
            loop {
                let (w, e) = next[u].unwrap();
                best = best.min(e);
                u = w;
                if u == v {
                    break;
                }
            }
            cut.push(best);
        }
        for u in walk {
            state[u] = 2;
        }
    }
    cut
}

pub fn forest_decompose(
    g: &Graph,
    o: &Orientation,
    a: usize,
    eps: f64,
    seed: u64,
    cfg: &ForestConfig,
) -> Result<(ForestDecomposition, RunMetrics, ForestReport)> {
    check_eps(eps)?;
    o.validate(g)?;
    let k = (a as f64 * (1.0 + eps) + 1e-9).floor() as usize;
    let max_out = o.max_out_degree(g);
    if max_out > k {
        return Err(precondition(format!("out-degree {max_out} exceeds floor(a (1 + eps)) = {k}")));
    }
    let need = cfg.c2 * (g.n().max(2) as f64).ln() / (eps * eps);
    if cfg.hypotheses == Hypotheses::Enforce && (a as f64) < need {
        return Err(param(format!("a = {a} is below c2 ln n / eps^2 = {need:.1}")));
    }
    let q = (1.0 - eps) / (1.0 + eps);
    let engine = Engine::new(g);
    let mut metrics = RunMetrics::default();
    let mut found = None;
    for attempt in 0..cfg.attempts.max(1) {
        let run = engine.run(&Activate { k, q }, seed.wrapping_add((attempt as u64) << 40), 2)?;
        metrics.then("activate", run.metrics.rounds, run.metrics.messages);
        if let Some(asg) = assign(g, o, k, &run.states) {
            found = Some((attempt + 1, asg));
            break;
        }
    }
    let Some((attempts, asg)) = found else {
        return Err(Error::Invariant(format!(
            "an active forest found no inactive head in {} attempts",
            cfg.attempts.max(1)
        )));
    };
    metrics.then("assign", 1, 0);

    let mut forest = asg.forest;
    let slots = asg.leftover.iter().map(Vec::len).max().unwrap_or(0);
    for r in 0..slots {
        let members: Vec<(NodeId, EdgeId)> =
            (0..g.n()).filter_map(|v| asg.leftover[v].get(r).map(|&e| (v, e))).collect();
        for &(_, e) in &members {
            forest[e] = k + 2 * r;
        }
        for e in break_cycles(g, o, &members) {
            forest[e] = k + 2 * r + 1;
        }
    }

    // drop empty forests
    let total = k + 2 * slots;
    let mut used = vec![false; total];
    for &f in &forest {
        used[f] = true;
    }
    let mut renumber = vec![usize::MAX; total];
    let mut star_flags = Vec::new();
    for f in 0..total {
        if used[f] {
            renumber[f] = star_flags.len();
            star_flags.push(f < k);
        }
    }
    let assignment = forest.iter().map(|&f| renumber[f] as u32).collect();
    let decomposition = ForestDecomposition { forests: star_flags.len(), assignment, star_flags };
    let report = ForestReport {
        attempts,
        primary: k,
        active_min: asg.active.iter().copied().min().unwrap_or(0),
        active_max: asg.active.iter().copied().max().unwrap_or(0),
        max_leftover: slots,
    };
    Ok((decomposition, metrics, report))
}
