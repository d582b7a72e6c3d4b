//! Directed degree splitting: orientations with small in- and out-degree.

pub mod flow;
pub mod forest;

pub use flow::{arboricity_orient, orient_to, FlowConfig, FlowMode, FlowOutcome, IterationStats, VirtualFlowGraph};
pub use forest::{forest_decompose, ForestConfig, ForestReport};

use crate::artifact::Orientation;
use crate::error::{param, Error, Result};
use crate::graph::virtualize::virtualize;
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::RunMetrics;
use crate::split::{
    accept_per_terminal, check_eps, default_cap, find_augmenting_paths, greedy_paths, log15, luby_paths, path_limit,
    Arrival, AugmentingPath, Finder, Hypotheses, Invocation, PathSpace, SplitConfig, TokenParams,
};

/// Augmenting paths of an orientation at threshold `t`: they start at a node
/// with out-degree at least `t`, follow out-edges and stop at a node with
/// out-degree at most `t - 2`.
pub struct Directed<'a> {
    pub graph: &'a Graph,
    pub orientation: &'a Orientation,
    pub out: Vec<usize>,
    pub t: usize,
}

impl<'a> Directed<'a> {
    pub fn new(graph: &'a Graph, orientation: &'a Orientation, t: usize) -> Directed<'a> {
        Directed { graph, orientation, out: orientation.out_degrees(graph), t }
    }

    fn terminal(&self, w: NodeId) -> bool {
        self.out[w] + 2 <= self.t
    }
}

impl PathSpace for Directed<'_> {
    type Mode = ();

    fn graph(&self) -> &Graph {
        self.graph
    }

    fn sources(&self) -> Vec<(NodeId, ())> {
        (0..self.graph.n()).filter(|&v| self.out[v] >= self.t).map(|v| (v, ())).collect()
    }

    fn moves(&self, v: NodeId, _: (), out: &mut Vec<EdgeId>) {
        out.clear();
        for p in self.graph.ports(v) {
            if p.other().is_some() && self.orientation.tail(p.edge()) == v {
                out.push(p.edge());
            }
        }
    }

    fn arrive(&self, w: NodeId, _: ()) -> Arrival<()> {
        if self.terminal(w) {
            Arrival::Terminal
        } else {
            Arrival::Continue(())
        }
    }

    fn validate(&self, path: &AugmentingPath) -> Result<()> {
        check_path(self.graph, self.orientation, &self.out, self.t, path)
    }
}

fn check_path(g: &Graph, o: &Orientation, out: &[usize], t: usize, path: &AugmentingPath) -> Result<()> {
    path.check_shape(g)?;
    if out[path.source] < t {
        return Err(Error::InvalidPath(format!("node {} has out-degree below {t}", path.source)));
    }
    for (i, &e) in path.edges.iter().enumerate() {
        if o.tail(e) != path.nodes[i] {
            return Err(Error::InvalidPath(format!("edge {e} points the wrong way")));
        }
    }
    if out[path.terminal()] + 2 > t {
        return Err(Error::InvalidPath(format!("node {} cannot take another out-edge", path.terminal())));
    }
    Ok(())
}

/// Reverses the path in place after validating it.
pub fn reverse_path(g: &Graph, o: &mut Orientation, t: usize, path: &AugmentingPath) -> Result<()> {
    Directed::new(g, o, t).validate(path)?;
    for &e in &path.edges {
        o.flip(g, e);
    }
    Ok(())
}

fn apply(g: &Graph, o: &mut Orientation, t: usize, floor: usize, found: &[AugmentingPath]) -> Result<(usize, usize)> {
    let accepted = accept_per_terminal(found);
    let mut applied = 0;
    let mut out = o.out_degrees(g);
    for p in &accepted {
        if check_path(g, o, &out, t, p).is_err() {
            continue;
        }
        if out[p.source] <= floor {
            return Err(Error::ContractViolation { node: p.source });
        }
        for &e in &p.edges {
            o.flip(g, e);
        }
        out[p.source] -= 1;
        out[p.terminal()] += 1;
        applied += 1;
    }
    Ok((accepted.len(), applied))
}

#[derive(Clone, Debug)]
pub struct DirectedOutcome {
    pub orientation: Orientation,
    pub metrics: RunMetrics,
    pub invocations: Vec<Invocation>,
}

/// Lowers the maximum out-degree to `target` one threshold at a time. Nodes
/// at or below `target` never lose an out-edge.
pub fn reduce_out_degree(
    g: &Graph,
    o: &mut Orientation,
    target: usize,
    eps: f64,
    cfg: &SplitConfig,
    metrics: &mut RunMetrics,
    log: &mut Vec<Invocation>,
) -> Result<()> {
    let d = g.max_degree();
    let cap = cfg.iteration_cap.unwrap_or_else(|| default_cap(g));
    let l = path_limit(g.n(), eps, cfg.path_c);
    let (mut find_rounds, mut find_msgs, mut aug_rounds) = (0usize, 0u64, 0usize);
    let start = o.max_out_degree(g);
    for t in (target + 1..=start).rev() {
        let mut iteration = 0;
        loop {
            let space = Directed::new(g, o, t);
            let sources = space.sources().len();
            if sources == 0 {
                break;
            }
            if iteration == cap {
                return Err(Error::IterationCap { cap, residual: sources });
            }
            let mut inv = Invocation { t, sources, ..Invocation::default() };
            let found = match cfg.finder {
                Finder::Tokens => {
                    let r = find_augmenting_paths(&space, &TokenParams::new(g.m(), t, d, eps)?);
                    find_rounds += r.rounds;
                    inv.levels = r.levels;
                    r.paths
                }
                Finder::Greedy => {
                    let (p, m) = greedy_paths(&space, l);
                    find_rounds += m.rounds;
                    p
                }
                Finder::Luby => {
                    let (p, m) = luby_paths(&space, l, cfg.seed ^ ((t as u64) << 32) ^ iteration as u64)?;
                    find_rounds += m.rounds;
                    find_msgs += m.messages;
                    p
                }
            };
            inv.returned = found.len();
            (inv.accepted, inv.augmented) = apply(g, o, t, target, &found)?;
            aug_rounds += 2 * found.iter().map(|p| p.len()).max().unwrap_or(0);
            if inv.augmented == 0 && cfg.finder == Finder::Tokens && cfg.hypotheses == Hypotheses::Relax {
                let (found, m) = greedy_paths(&Directed::new(g, o, t), l);
                find_rounds += m.rounds;
                inv.fallback = true;
                inv.returned = found.len();
                (inv.accepted, inv.augmented) = apply(g, o, t, target, &found)?;
                aug_rounds += 2 * found.iter().map(|p| p.len()).max().unwrap_or(0);
            }
            let stalled = inv.augmented == 0;
            log.push(inv);
            if stalled {
                return Err(Error::Stalled { t, residual: sources });
            }
            iteration += 1;
        }
    }
    metrics.then("find-paths", find_rounds, find_msgs);
    metrics.then("augment", aug_rounds, 0);
    Ok(())
}

/// Checks `out'(u) >= min(out(u), d)` and `out'(u) <= d` for every node.
pub fn audit_reducer(g: &Graph, before: &Orientation, after: &Orientation, d: usize) -> Result<()> {
    let a = before.out_degrees(g);
    let b = after.out_degrees(g);
    match (0..g.n()).find(|&u| b[u] < a[u].min(d) || b[u] > d) {
        Some(node) => Err(Error::ContractViolation { node }),
        None => Ok(()),
    }
}

/// Bounds in- and out-degree by `d` using a reducer that only bounds the
/// out-degree: reduce, reverse every edge, reduce again.
pub fn bound_both_sides<F>(g: &Graph, start: Orientation, d: usize, mut inner: F) -> Result<(Orientation, RunMetrics)>
where
    F: FnMut(&Orientation) -> Result<(Orientation, RunMetrics)>,
{
    let need = g.max_degree().div_ceil(2);
    if d < need {
        return Err(param(format!("bound {d} is below ceil(D / 2) = {need}")));
    }
    let (first, mut metrics) = inner(&start)?;
    audit_reducer(g, &start, &first, d)?;
    let flipped = first.reversed(g);
    let (second, m) = inner(&flipped)?;
    audit_reducer(g, &flipped, &second, d)?;
    metrics.then("reverse", 0, 0);
    metrics.append(m);
    let inn = second.in_degrees(g);
    if let Some(v) = (0..g.n()).find(|&v| inn[v] > d) {
        return Err(Error::Invariant(format!("node {v} has in-degree {} above {d}", inn[v])));
    }
    Ok((second, metrics))
}

fn directed_low(g: &Graph, eps: f64, target: usize, cfg: &SplitConfig) -> Result<DirectedOutcome> {
    let mut invocations = Vec::new();
    let (orientation, metrics) = bound_both_sides(g, Orientation::lower_to_higher(g), target, |o| {
        let mut o = o.clone();
        let mut m = RunMetrics::default();
        reduce_out_degree(g, &mut o, target, eps, cfg, &mut m, &mut invocations)?;
        Ok((o, m))
    })?;
    Ok(DirectedOutcome { orientation, metrics, invocations })
}

/// In- and out-degree at most `floor((1 + eps) D / 2)` with deterministic
/// augmenting paths. Large degrees are first cut into virtual nodes of
/// degree `ceil(8 log_1.5(m) / eps)` which are split with half the slack.
pub fn directed_split_deterministic(g: &Graph, eps: f64, cfg: &SplitConfig) -> Result<DirectedOutcome> {
    check_eps(eps)?;
    let delta = g.max_degree();
    let bound = ((1.0 + eps) * delta as f64 / 2.0).floor() as usize;
    if g.m() == 0 {
        return Ok(DirectedOutcome {
            orientation: Orientation::from_tails(Vec::new()),
            metrics: RunMetrics::default(),
            invocations: Vec::new(),
        });
    }
    let lg = log15(g.m());
    if cfg.hypotheses == Hypotheses::Enforce && eps <= 4.0 * lg / delta as f64 {
        return Err(param(format!(
            "epsilon {eps} is at most 4 log_1.5(m) / D = {:.3}; use the randomized split",
            4.0 * lg / delta as f64
        )));
    }
    let high = (32.0 * lg / (eps * eps)).ceil() as usize;
    let d = (8.0 * lg / eps).ceil() as usize;
    if delta < high || delta <= d {
        return directed_low(g, eps, bound, cfg);
    }
    let (vg, map) = virtualize(g, d)?;
    let inner = SplitConfig { hypotheses: Hypotheses::Relax, ..cfg.clone() };
    let half = eps / 2.0;
    let out = directed_low(&vg, half, ((1.0 + half) * vg.max_degree() as f64 / 2.0).floor() as usize, &inner)?;
    let orientation = map.devirtualize_orientation(g, &out.orientation)?;
    check_both(g, &orientation, bound)?;
    let mut metrics = RunMetrics::phase("virtualize", 1, 0);
    metrics.append(out.metrics);
    Ok(DirectedOutcome { orientation, metrics, invocations: out.invocations })
}

fn check_both(g: &Graph, o: &Orientation, d: usize) -> Result<()> {
    let out = o.out_degrees(g);
    let inn = o.in_degrees(g);
    match (0..g.n()).find(|&v| out[v] > d || inn[v] > d) {
        Some(v) => Err(Error::Invariant(format!("node {v} has out {} and in {} above {d}", out[v], inn[v]))),
        None => Ok(()),
    }
}

/// In- and out-degree at most `ceil((1 + eps) D / 2)` from two runs of the
/// flow-based reducer.
pub fn directed_split_randomized(g: &Graph, eps: f64, cfg: &FlowConfig) -> Result<(Orientation, RunMetrics)> {
    check_eps(eps)?;
    let d = ((1.0 + eps) * g.max_degree() as f64 / 2.0).ceil() as usize;
    if g.m() == 0 {
        return Ok((Orientation::from_tails(Vec::new()), RunMetrics::default()));
    }
    let (o, m) = bound_both_sides(g, Orientation::lower_to_higher(g), d, |o| {
        let out = orient_to(g, o.clone(), d, eps, cfg)?;
        Ok((out.orientation, out.metrics))
    })?;
    check_both(g, &o, d)?;
    Ok((o, m))
}
