//! Exact optimal out-degree and arboricity by maximum flow, plus subset
//! enumeration for tiny graphs.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const OUTDEGREE_CAP: usize = 2000;
pub const ARBORICITY_CAP: usize = 500;
const SUBSET_CAP: usize = 20;

/// Maximum flow by shortest augmenting paths in layered graphs.
pub struct MaxFlow {
    head: Vec<usize>,
    cap: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlow {
    pub fn new(n: usize) -> MaxFlow {
        MaxFlow { head: Vec::new(), cap: Vec::new(), adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: u64) {
        self.adj[u].push(self.head.len());
        self.head.push(v);
        self.cap.push(c);
        self.adj[v].push(self.head.len());
        self.head.push(u);
        self.cap.push(0);
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adj[v] {
                let w = self.head[a];
                if self.cap[a] > 0 && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn push(&mut self, v: usize, t: usize, f: u64, level: &[usize], it: &mut [usize]) -> u64 {
        if v == t {
            return f;
        }
        while it[v] < self.adj[v].len() {
            let a = self.adj[v][it[v]];
            let w = self.head[a];
            if self.cap[a] > 0 && level[w] == level[v] + 1 {
                let got = self.push(w, t, f.min(self.cap[a]), level, it);
                if got > 0 {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            it[v] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        while let Some(level) = self.levels(s, t) {
            let mut it = vec![0usize; self.adj.len()];
            loop {
                let f = self.push(s, t, u64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Whether the edges can be oriented with every out-degree at most `d`; a
/// half-edge always leaves its endpoint.
fn orientable(g: &Graph, d: usize) -> bool {
    let (n, m) = (g.n(), g.m());
    let (s, t) = (n + m, n + m + 1);
    let mut f = MaxFlow::new(n + m + 2);
    for (e, a, b) in g.edges() {
        f.add_edge(s, n + e, 1);
        f.add_edge(n + e, a, 1);
        if let Some(b) = b {
            f.add_edge(n + e, b, 1);
        }
    }
    for v in 0..n {
        f.add_edge(v, t, d as u64);
    }
    f.max_flow(s, t) == m as u64
}

/// Smallest possible maximum out-degree over all orientations.
pub fn min_max_outdegree_exact(g: &Graph) -> Result<usize> {
    if g.n() > OUTDEGREE_CAP {
        return Err(Error::Budget(format!("{} nodes is above the cap {OUTDEGREE_CAP}", g.n())));
    }
    if g.m() == 0 {
        return Ok(0);
    }
    let (mut lo, mut hi) = (1, g.max_degree());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if orientable(g, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Whether some node set `H` containing `root` has more than
/// `k (|H| - 1)` full edges inside: a maximum-weight closure where edges
/// weigh 1, nodes other than the root weigh `-k` and the root is forced in.
fn too_dense_at(g: &Graph, k: usize, root: usize, full: &[(usize, usize)]) -> bool {
    let (n, m) = (g.n(), full.len());
    let (s, t) = (n + m, n + m + 1);
    let mut f = MaxFlow::new(n + m + 2);
    for (i, &(a, b)) in full.iter().enumerate() {
        f.add_edge(s, n + i, 1);
        f.add_edge(n + i, a, u64::MAX / 4);
        f.add_edge(n + i, b, u64::MAX / 4);
    }
    for v in 0..n {
        if v == root {
            f.add_edge(s, v, u64::MAX / 4);
        } else {
            f.add_edge(v, t, k as u64);
        }
    }
    f.max_flow(s, t) < m as u64
}

/// Minimum number of forests covering the full edges.
pub fn arboricity_exact_small(g: &Graph) -> Result<usize> {
    if g.n() > ARBORICITY_CAP {
        return Err(Error::Budget(format!("{} nodes is above the cap {ARBORICITY_CAP}", g.n())));
    }
    let full: Vec<(usize, usize)> = g.edges().filter_map(|(_, a, b)| b.map(|b| (a, b))).collect();
    if full.is_empty() {
        return Ok(0);
    }
    let fits = |k: usize| !(0..g.n()).any(|r| g.degree(r) > 0 && too_dense_at(g, k, r, &full));
    let (mut lo, mut hi) = (1, g.max_degree());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

fn subset_counts(g: &Graph) -> Result<Vec<(usize, usize)>> {
    let n = g.n();
    if n > SUBSET_CAP {
        return Err(Error::Budget(format!("{n} nodes is too many for subset enumeration")));
    }
    let ends: Vec<(usize, Option<usize>)> = g.edges().map(|(_, a, b)| (a, b)).collect();
    Ok((1u32..1 << n)
        .map(|mask| {
            let inside = |v: usize| mask >> v & 1 == 1;
            let edges = ends.iter().filter(|&&(a, b)| inside(a) && b.is_none_or(inside)).count();
            (mask.count_ones() as usize, edges)
        })
        .collect())
}

/// `max ceil(|E(H)| / |H|)` over all node sets, by enumeration.
pub fn min_max_outdegree_by_subsets(g: &Graph) -> Result<usize> {
    Ok(subset_counts(g)?.into_iter().map(|(k, e)| e.div_ceil(k)).max().unwrap_or(0))
}

/// `max ceil(|E(H)| / (|H| - 1))` over node sets of two or more, by
/// enumeration; half-edges are ignored.
pub fn arboricity_by_subsets(g: &Graph) -> Result<usize> {
    let full = Graph::new(g.n(), g.edges().filter_map(|(_, a, b)| b.map(|b| (a, Some(b)))))?;
    Ok(subset_counts(&full)?
        .into_iter()
        .filter(|&(k, _)| k >= 2)
        .map(|(k, e)| e.div_ceil(k - 1))
        .max()
        .unwrap_or(0))
}
