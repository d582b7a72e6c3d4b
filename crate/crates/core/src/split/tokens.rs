//! Deterministic search for almost edge-disjoint augmenting paths with
//! splitting tokens.
//!
//! Each source starts one token. In each step every token asks its node for
//! edges of its mode. A node serves requests by increasing source id and
//! trace; while it has budget it hands out two edges and the token splits,
//! otherwise one edge. Edges leave a node in increasing id order and each
//! `(edge, direction)` is handed out at most once per search. At the end of
//! a level a source either keeps a fixed quota of tokens or fails.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::paths::{Arrival, AugmentingPath, PathSpace};
use crate::error::{param, Result};
use crate::graph::{EdgeId, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenParams {
    /// `log_1.5 m`.
    pub lg: f64,
    pub levels: usize,
    /// Two-edge grants per node and level.
    pub budget: usize,
    /// Steps per level.
    pub steps: usize,
}

impl TokenParams {
    /// `m` edges, threshold `t`, maximum degree `d`.
    pub fn new(m: usize, t: usize, d: usize, eps: f64) -> Result<TokenParams> {
        if !(eps > 0.0) {
            return Err(param(format!("epsilon must be positive, got {eps}")));
        }
        let lg = log15(m);
        let slack = 2.0 * t as f64 - d as f64 - 2.0;
        let budget = if slack > 0.0 { (slack / lg).floor() as usize } else { 0 };
        Ok(TokenParams {
            lg,
            levels: (lg.ceil() as usize).max(1),
            budget,
            steps: (16.0 / 3.0 * lg * lg / eps).ceil() as usize,
        })
    }
}

/// `log_1.5 m`, at least 1.
pub fn log15(m: usize) -> f64 {
    ((m.max(2)) as f64).ln().max(1.5f64.ln()) / 1.5f64.ln()
}

/// Tokens a surviving source owns at each level.
pub fn quota(level: usize) -> usize {
    let mut l: usize = 1;
    for _ in 1..level {
        l = 2 * (3 * l).div_ceil(4);
    }
    l
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub active: usize,
    pub failed: usize,
    pub found: usize,
    pub steps: usize,
}

#[derive(Clone, Debug, Default)]
pub struct TokenSearch {
    pub paths: Vec<AugmentingPath>,
    pub levels: Vec<LevelStats>,
    pub rounds: usize,
    pub sources: usize,
}

const ROOT: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Link {
    prev: u32,
    edge: u32,
    node: u32,
    depth: u32,
}

#[derive(Clone, Copy)]
struct Token<M> {
    src: u32,
    link: u32,
    mode: M,
    active: bool,
}

struct Arena {
    links: Vec<Link>,
}

impl Arena {
    fn node(&self, l: u32) -> NodeId {
        self.links[l as usize].node as NodeId
    }

    fn trace(&self, mut l: u32) -> Vec<EdgeId> {
        let mut out = Vec::with_capacity(self.links[l as usize].depth as usize);
        while self.links[l as usize].prev != ROOT {
            out.push(self.links[l as usize].edge as EdgeId);
            l = self.links[l as usize].prev;
        }
        out.reverse();
        out
    }

    fn cmp_traces(&self, a: u32, b: u32) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.trace(a).cmp(&self.trace(b))
    }

    fn path(&self, source: NodeId, l: u32) -> AugmentingPath {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut at = l;
        loop {
            let k = self.links[at as usize];
            nodes.push(k.node as NodeId);
            if k.prev == ROOT {
                break;
            }
            edges.push(k.edge as EdgeId);
            at = k.prev;
        }
        nodes.reverse();
        edges.reverse();
        AugmentingPath { source, nodes, edges }
    }
}

pub fn find_augmenting_paths<S: PathSpace>(space: &S, params: &TokenParams) -> TokenSearch {
    let g = space.graph();
    let sources = space.sources();
    let mut result = TokenSearch { sources: sources.len(), ..TokenSearch::default() };
    if sources.is_empty() {
        return result;
    }
    let mut arena = Arena { links: Vec::new() };
    let mut tokens: Vec<Token<S::Mode>> = Vec::new();
    for (i, &(s, mode)) in sources.iter().enumerate() {
        arena.links.push(Link { prev: ROOT, edge: 0, node: s as u32, depth: 0 });
        tokens.push(Token { src: i as u32, link: i as u32, mode, active: true });
    }
    // 0 running, 1 found, 2 failed
    let mut state = vec![0u8; sources.len()];
    let mut used = vec![[false; 2]; g.m()];
    let mut budget = vec![0usize; g.n()];
    let mut moves = Vec::new();

    for level in 1..=params.levels {
        let running = state.iter().filter(|&&s| s == 0).count();
        if running == 0 {
            break;
        }
        let mut stats = LevelStats { level, active: running, ..LevelStats::default() };
        budget.iter_mut().for_each(|b| *b = params.budget);
        // tokens created by a split wait for the next level
        let mut parked: Vec<Token<S::Mode>> = Vec::new();

        for _ in 0..params.steps {
            let mut order: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i].active).collect();
            if order.is_empty() {
                break;
            }
            stats.steps += 1;
            order.sort_by(|&a, &b| {
                let (ta, tb) = (&tokens[a], &tokens[b]);
                arena
                    .node(ta.link)
                    .cmp(&arena.node(tb.link))
                    .then(sources[ta.src as usize].0.cmp(&sources[tb.src as usize].0))
                    .then_with(|| arena.cmp_traces(ta.link, tb.link))
            });
            let mut finished: Vec<(u32, u32)> = Vec::new();
            let mut grants: Vec<(usize, Vec<EdgeId>)> = Vec::new();
            let mut i = 0;
            while i < order.len() {
                let u = arena.node(tokens[order[i]].link);
                let mut j = i;
                while j < order.len() && arena.node(tokens[order[j]].link) == u {
                    j += 1;
                }
                for &k in &order[i..j] {
                    let want = if budget[u] > 0 { 2 } else { 1 };
                    space.moves(u, tokens[k].mode, &mut moves);
                    let got: Vec<EdgeId> = moves
                        .iter()
                        .copied()
                        .filter(|&e| !used[e][g.side(e, u)])
                        .take(want)
                        .collect();
                    for &e in &got {
                        used[e][g.side(e, u)] = true;
                    }
                    if got.len() == 2 {
                        budget[u] -= 1;
                    }
                    grants.push((k, got));
                }
                i = j;
            }
            for (k, got) in grants {
                let tok = tokens[k];
                let u = arena.node(tok.link);
                let mut children = Vec::with_capacity(2);
                for e in &got {
                    let w = g.other(*e, u).expect("moves are full edges");
                    let depth = arena.links[tok.link as usize].depth + 1;
                    arena.links.push(Link { prev: tok.link, edge: *e as u32, node: w as u32, depth });
                    let link = (arena.links.len() - 1) as u32;
                    match space.arrive(w, tok.mode) {
                        Arrival::Terminal => {
                            finished.push((tok.src, link));
                            children.push(None);
                        }
                        Arrival::Continue(mode) => children.push(Some(Token { src: tok.src, link, mode, active: true })),
                    }
                }
                match got.len() {
                    0 => tokens[k].active = false,
                    1 => match children[0] {
                        Some(t) => tokens[k] = t,
                        None => tokens[k].active = false,
                    },
                    _ => {
                        tokens[k].active = false;
                        parked.extend(children.into_iter().flatten().map(|t| Token { active: false, ..t }));
                    }
                }
            }
            for (src, link) in finished {
                let s = src as usize;
                if state[s] != 0 {
                    continue;
                }
                let path = arena.path(sources[s].0, link);
                if space.validate(&path).is_ok() {
                    state[s] = 1;
                    stats.found += 1;
                    result.paths.push(path);
                }
            }
            for t in tokens.iter_mut() {
                if state[t.src as usize] != 0 {
                    t.active = false;
                }
            }
        }

        // quota check
        let mut max_depth = 0;
        let next_quota = quota(level + 1);
        let mut by_source: Vec<Vec<Token<S::Mode>>> = vec![Vec::new(); sources.len()];
        for t in tokens.iter().filter(|t| t.active).chain(parked.iter()) {
            max_depth = max_depth.max(arena.links[t.link as usize].depth as usize);
            if state[t.src as usize] == 0 {
                by_source[t.src as usize].push(*t);
            }
        }
        let mut next = Vec::new();
        for (s, mut own) in by_source.into_iter().enumerate() {
            if state[s] != 0 {
                continue;
            }
            if own.len() < next_quota {
                state[s] = 2;
                stats.failed += 1;
                continue;
            }
            own.sort_by(|a, b| arena.cmp_traces(a.link, b.link));
            own.truncate(next_quota);
            next.extend(own.into_iter().map(|t| Token { active: true, ..t }));
        }
        tokens = next;
        result.rounds += params.steps + 2 * max_depth;
        result.levels.push(stats);
    }
    result.paths.sort_by_key(|p| p.source);
    result
}
