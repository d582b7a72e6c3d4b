//! Maximal sets of short almost edge-disjoint augmenting paths.
//!
//! The greedy finder grows an alternating breadth-first tree from each
//! source in turn. The Luby finder enumerates every short path and picks a
//! maximal independent set of the conflict graph; it is only usable on small
//! inputs.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::paths::{Arrival, AugmentingPath, PathSpace};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::mis::luby_mis;
use crate::sim::RunMetrics;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinderMode {
    #[default]
    Greedy,
    Luby,
}

#[derive(Clone, Debug)]
pub struct TreeGrowth {
    pub path: Option<AugmentingPath>,
    /// Tree size after each completed layer, the root alone first.
    pub sizes: Vec<usize>,
}

/// Path length limit `ceil(c * ln n / eps) + 1`.
pub fn path_limit(n: usize, eps: f64, c: f64) -> usize {
    (c * (n.max(2) as f64).ln() / eps).ceil() as usize + 1
}

/// Breadth-first alternating tree from `source`. Traversals in `used` are
/// closed; an edge used in the opposite direction may still end a path.
pub fn grow_tree<S: PathSpace>(
    space: &S,
    source: NodeId,
    mode: S::Mode,
    used: &[[bool; 2]],
    max_len: usize,
) -> TreeGrowth {
    let g = space.graph();
    let mut parent: HashMap<NodeId, (NodeId, EdgeId)> = HashMap::new();
    parent.insert(source, (source, usize::MAX));
    let mut layer = vec![(source, mode)];
    let mut sizes = vec![1];
    let mut moves = Vec::new();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for &(u, m) in &layer {
            space.moves(u, m, &mut moves);
            for &e in &moves {
                let side = g.side(e, u);
                if used[e][side] {
                    continue;
                }
                let w = g.other(e, u).expect("moves are full edges");
                match space.arrive(w, m) {
                    Arrival::Terminal => {
                        if !on_branch(&parent, u, w) {
                            let path = unwind(&parent, source, u, e, w);
                            return TreeGrowth { path: Some(path), sizes };
                        }
                    }
                    Arrival::Continue(m2) => {
                        if used[e][1 - side] || parent.contains_key(&w) {
                            continue;
                        }
                        parent.insert(w, (u, e));
                        next.push((w, m2));
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        sizes.push(sizes.last().unwrap() + next.len());
        layer = next;
    }
    TreeGrowth { path: None, sizes }
}

fn on_branch(parent: &HashMap<NodeId, (NodeId, EdgeId)>, mut u: NodeId, w: NodeId) -> bool {
    loop {
        if u == w {
            return true;
        }
        let (p, e) = parent[&u];
        if e == usize::MAX {
            return false;
        }
        u = p;
    }
}

fn unwind(parent: &HashMap<NodeId, (NodeId, EdgeId)>, source: NodeId, u: NodeId, e: EdgeId, w: NodeId) -> AugmentingPath {
    let mut nodes = vec![w, u];
    let mut edges = vec![e];
    let mut at = u;
    while at != source {
        let (p, pe) = parent[&at];
        edges.push(pe);
        nodes.push(p);
        at = p;
    }
    nodes.reverse();
    edges.reverse();
    AugmentingPath { source, nodes, edges }
}

fn mark(g: &Graph, used: &mut [[bool; 2]], p: &AugmentingPath) {
    for (e, side) in p.traversals(g) {
        used[e][side] = true;
    }
}

/// One tree per source in increasing order; each found path closes its
/// traversals for the sources after it.
pub fn greedy_paths<S: PathSpace>(space: &S, max_len: usize) -> (Vec<AugmentingPath>, RunMetrics) {
    let g = space.graph();
    let mut used = vec![[false; 2]; g.m()];
    let mut out = Vec::new();
    let sources = space.sources();
    for &(s, mode) in &sources {
        if let Some(p) = grow_tree(space, s, mode, &used, max_len).path {
            mark(g, &mut used, &p);
            out.push(p);
        }
    }
    let rounds = if sources.is_empty() { 0 } else { sources.len() * 2 * max_len };
    (out, RunMetrics::phase("greedy-paths", rounds, 0))
}

/// Every augmenting path of length at most `max_len` that stops at its first
/// terminal.
pub fn enumerate_paths<S: PathSpace>(space: &S, max_len: usize, budget: usize) -> Result<Vec<AugmentingPath>> {
    let g = space.graph();
    let mut out = Vec::new();
    let mut on = vec![false; g.n()];
    for (s, mode) in space.sources() {
        let mut nodes = vec![s];
        let mut edges = Vec::new();
        on[s] = true;
        walk(space, mode, max_len, budget, &mut nodes, &mut edges, &mut on, &mut out)?;
        on[s] = false;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk<S: PathSpace>(
    space: &S,
    mode: S::Mode,
    max_len: usize,
    budget: usize,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<EdgeId>,
    on: &mut [bool],
    out: &mut Vec<AugmentingPath>,
) -> Result<()> {
    if edges.len() == max_len {
        return Ok(());
    }
    let g = space.graph();
    let u = *nodes.last().unwrap();
    let mut moves = Vec::new();
    space.moves(u, mode, &mut moves);
    for e in moves {
        let w = g.other(e, u).unwrap();
        if on[w] {
            continue;
        }
        nodes.push(w);
        edges.push(e);
        match space.arrive(w, mode) {
            Arrival::Terminal => {
                if out.len() == budget {
                    return Err(Error::Budget(format!(
                        "more than {budget} candidate paths; use the greedy finder"
                    )));
                }
                out.push(AugmentingPath { source: nodes[0], nodes: nodes.clone(), edges: edges.clone() });
            }
            Arrival::Continue(m2) => {
                on[w] = true;
                walk(space, m2, max_len, budget, nodes, edges, on, out)?;
                on[w] = false;
            }
        }
        nodes.pop();
        edges.pop();
    }
    Ok(())
}

pub const LUBY_MAX_NODES: usize = 60;
pub const LUBY_MAX_LEN: usize = 10;
pub const LUBY_BUDGET: usize = 200_000;

/// Maximal independent set of the conflict graph over all short paths; two
/// paths conflict when they share a source or a traversal.
pub fn luby_paths<S: PathSpace>(space: &S, max_len: usize, seed: u64) -> Result<(Vec<AugmentingPath>, RunMetrics)> {
    let g = space.graph();
    if g.n() > LUBY_MAX_NODES {
        return Err(Error::Budget(format!("{} nodes is beyond the supergraph limit; use the greedy finder", g.n())));
    }
    let max_len = max_len.min(LUBY_MAX_LEN);
    let candidates = enumerate_paths(space, max_len, LUBY_BUDGET)?;
    let mut groups: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
    for (i, p) in candidates.iter().enumerate() {
        groups.entry((0, p.source, 0)).or_default().push(i);
        for (e, side) in p.traversals(g) {
            groups.entry((1, e, side)).or_default().push(i);
        }
    }
    let mut conflicts = Vec::new();
    let mut keys: Vec<_> = groups.keys().copied().collect();
    keys.sort_unstable();
    for k in keys {
        let group = &groups[&k];
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                conflicts.push((i, Some(j)));
            }
        }
    }
    conflicts.sort_unstable();
    conflicts.dedup();
    let super_graph = Graph::new(candidates.len(), conflicts)?;
    let (chosen, m) = luby_mis(&super_graph, seed, 64 * (candidates.len().max(2)).ilog2() as usize + 64)?;
    let paths: Vec<AugmentingPath> = candidates
        .into_iter()
        .zip(chosen)
        .filter_map(|(p, keep)| keep.then_some(p))
        .collect();
    let metrics = RunMetrics::phase("luby-paths", m.rounds * max_len, m.messages);
    Ok((paths, metrics))
}
