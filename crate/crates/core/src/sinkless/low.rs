//! Minimum degree between 3 and the shattering threshold.
//!
//! Edges on cycles of length at most `3c` are oriented first. The remaining
//! nodes are grouped into tree clusters around a maximal `c`-independent
//! set; the clusters are contracted, oriented, and expanded again.

use super::cycles::{min_short_cycles, Labels};
use super::deterministic::deterministic_sinkless_with;
use super::high::sinkless_high_degree;
use super::SinklessConfig;
use crate::artifact::Orientation;
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::RunMetrics;

/// Smallest `c` with `(d - 1)^(c / 2) > threshold`.
pub fn cluster_radius(d: usize, threshold: usize) -> usize {
    let base = (d - 1) as f64;
    let mut c = 1;
    while base.powf(c as f64 / 2.0) <= threshold as f64 {
        c += 1;
    }
    c
}

/// Every node within distance `r` of `v` over full edges, `v` included.
fn ball(g: &Graph, v: NodeId, r: usize, seen: &mut [u32], stamp: u32) -> Vec<NodeId> {
    let mut out = vec![v];
    seen[v] = stamp;
    let mut start = 0;
    for _ in 0..r {
        let end = out.len();
        for i in start..end {
            for p in g.ports(out[i]) {
                if let Some(w) = p.other() {
                    if seen[w] != stamp {
                        seen[w] = stamp;
                        out.push(w);
                    }
                }
            }
        }
        start = end;
    }
    out
}

/// Maximal set of nodes pairwise more than `r` apart. In each iteration every
/// candidate holding the smallest id among the candidates of its `r`-ball
/// joins, and everything within `r` of a new member stops being a candidate.
/// Returns the members in increasing order and the iteration count.
pub fn distance_independent_set(g: &Graph, r: usize) -> (Vec<NodeId>, usize) {
    let n = g.n();
    let mut candidate = vec![true; n];
    let mut left = n;
    let mut members = Vec::new();
    let mut seen = vec![0u32; n];
    let mut stamp = 0u32;
    let mut iterations = 0;
    while left > 0 {
        iterations += 1;
        let mut joining = Vec::new();
        for v in 0..n {
            if !candidate[v] {
                continue;
            }
            stamp += 1;
            let b = ball(g, v, r, &mut seen, stamp);
            if b.iter().all(|&w| !candidate[w] || w >= v) {
                joining.push(v);
            }
        }
        for &v in &joining {
            stamp += 1;
            for w in ball(g, v, r, &mut seen, stamp) {
                if candidate[w] {
                    candidate[w] = false;
                    left -= 1;
                }
            }
        }
        members.extend(joining);
    }
    members.sort_unstable();
    (members, iterations)
}

/// Each node's nearest member, ties to the smallest member id, with its
/// distance. Unreachable nodes keep `usize::MAX`.
pub fn nearest_member(g: &Graph, members: &[NodeId]) -> (Vec<usize>, Vec<usize>) {
    let n = g.n();
    let mut center = vec![usize::MAX; n];
    let mut dist = vec![usize::MAX; n];
    let mut layer: Vec<NodeId> = members.to_vec();
    for &s in members {
        center[s] = s;
        dist[s] = 0;
    }
    let mut k = 0;
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &u in &layer {
            for p in g.ports(u) {
                let Some(w) = p.other() else { continue };
                if dist[w] == usize::MAX {
                    dist[w] = k + 1;
                    center[w] = center[u];
                    next.push(w);
                } else if dist[w] == k + 1 {
                    center[w] = center[w].min(center[u]);
                }
            }
        }
        layer = next;
        k += 1;
    }
    (center, dist)
}

pub fn sinkless_low_degree(g: &Graph, d: usize, seed: u64, cfg: &SinklessConfig) -> Result<(Orientation, RunMetrics)> {
    if d < 3 {
        return Err(param(format!("minimum degree parameter must be at least 3, got {d}")));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) < d) {
        return Err(Error::Precondition(format!("node {v} has degree {} < {d}", g.degree(v))));
    }
    let c = cluster_radius(d, cfg.high_degree_threshold);
    let short_len = 3 * c;
    let cycles = min_short_cycles(g, short_len, cfg.order, &Labels::default())?;
    let mut tail: Vec<Option<NodeId>> = vec![None; g.m()];
    let mut satisfied = vec![false; g.n()];
    for (e, a, b) in g.edges() {
        if b.is_none() {
            tail[e] = Some(a);
            satisfied[a] = true;
        } else if let Some(cy) = &cycles[e] {
            tail[e] = Some(cy.tail);
            satisfied[a] = true;
            satisfied[b.unwrap()] = true;
        }
    }
    let mut metrics = RunMetrics::phase("short-cycles", short_len.div_ceil(2), 0);

    let rest: Vec<NodeId> = (0..g.n()).filter(|&v| !satisfied[v]).collect();
    if !rest.is_empty() {
        let sub = g.induced(&rest, true);
        let h = &sub.graph;
        let (members, iterations) = distance_independent_set(h, c);
        metrics.then("independent-set", 2 * c * iterations, 0);
        let (center, dist) = nearest_member(h, &members);
        metrics.then("clusters", c, 0);
        let cluster_of: Vec<usize> = {
            let mut index = vec![usize::MAX; h.n()];
            for (i, &s) in members.iter().enumerate() {
                index[s] = i;
            }
            center.iter().map(|&s| index[s]).collect()
        };

        // tree edge of each non-center node toward its center
        let mut parent: Vec<Option<EdgeId>> = vec![None; h.n()];
        for v in 0..h.n() {
            if dist[v] == 0 {
                continue;
            }
            parent[v] = h
                .ports(v)
                .iter()
                .filter_map(|p| p.other().map(|w| (w, p.edge())))
                .filter(|&(w, _)| cluster_of[w] == cluster_of[v] && dist[w] + 1 == dist[v])
                .min_by_key(|&(w, e)| (w, e))
                .map(|(_, e)| e);
        }
        let tree_edge: Vec<bool> = {
            let mut t = vec![false; h.m()];
            for e in parent.iter().flatten() {
                t[*e] = true;
            }
            t
        };

        // contracted structure
        let mut k_ends = Vec::new();
        let mut k_edge_of = Vec::new();
        for (e, a, b) in h.edges() {
            match b {
                None => k_ends.push((cluster_of[a], None)),
                Some(b) if cluster_of[a] != cluster_of[b] => k_ends.push((cluster_of[a], Some(cluster_of[b]))),
                Some(_) => continue,
            }
            k_edge_of.push(e);
        }
        let k = Graph::new(members.len(), k_ends)?;
        let kd = k.min_degree();
        let node_labels: Vec<usize> = members.iter().map(|&s| sub.node_of[s]).collect();
        let edge_labels: Vec<usize> = k_edge_of.iter().map(|&e| sub.edge_of[e]).collect();
        let (ko, km) = if kd > cfg.high_degree_threshold && kd >= 5 {
            sinkless_high_degree(&k, kd, seed, cfg)?
        } else {
            let labels = Labels { node: Some(&node_labels), edge: Some(&edge_labels) };
            let (o, m, _) = deterministic_sinkless_with(&k, kd, cfg.order, &labels)?;
            (o, m)
        };
        // every contracted round costs a walk across a cluster and back
        metrics.then("contracted", km.rounds * (2 * c + 1), km.messages);

        // orient contracted edges, then each cluster's tree toward its exit
        let mut local_tail: Vec<Option<NodeId>> = vec![None; h.m()];
        let mut exit: Vec<Option<(usize, NodeId)>> = vec![None; members.len()];
        for (ke, &e) in k_edge_of.iter().enumerate() {
            let (a, b) = h.endpoints(e);
            let kt = ko.tail(ke);
            let t = if cluster_of[a] == kt { a } else { b.unwrap() };
            local_tail[e] = Some(t);
            let label = edge_labels[ke];
            if exit[kt].is_none_or(|(l, _)| label < l) {
                exit[kt] = Some((label, t));
            }
        }
        let mut toward = vec![usize::MAX; h.n()];
        let mut queue: Vec<NodeId> = Vec::new();
        for x in exit.iter() {
            let (_, x) = x.ok_or_else(|| Error::Invariant("cluster without an outgoing edge".into()))?;
            toward[x] = 0;
            queue.push(x);
        }
        let mut i = 0;
        while i < queue.len() {
            let u = queue[i];
            i += 1;
            for p in h.ports(u) {
                let Some(w) = p.other() else { continue };
                if tree_edge[p.edge()] && toward[w] == usize::MAX {
                    toward[w] = toward[u] + 1;
                    local_tail[p.edge()] = Some(w);
                    queue.push(w);
                }
            }
        }
        metrics.then("expand", c, 0);
        for (e, t) in local_tail.into_iter().enumerate() {
            if let Some(t) = t {
                tail[sub.edge_of[e]] = Some(sub.node_of[t]);
            }
        }
    }

    // anything left joins satisfied nodes or lies off every tree
    let tail: Vec<NodeId> = g
        .edges()
        .map(|(e, a, b)| tail[e].unwrap_or_else(|| b.map_or(a, |b| a.min(b))))
        .collect();
    Ok((Orientation::from_tails(tail), metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, generate, Family};

    #[test]
    fn radius_constants() {
        assert_eq!(cluster_radius(3, 500), 18);
        assert_eq!(cluster_radius(4, 500), 12);
        assert_eq!(cluster_radius(501, 500), 3);
    }

    #[test]
    fn independent_set_is_spread_and_maximal() {
        let g = generate(&Family::Regular { n: 200, delta: 3 }, 1).unwrap();
        for r in 1..4 {
            let (s, _) = distance_independent_set(&g, r);
            let d = g.bfs_distances(&s);
            assert!(d.iter().all(|&x| x <= r));
            for &a in &s {
                let da = g.bfs_distances(&[a]);
                assert!(s.iter().all(|&b| b == a || da[b] > r));
            }
        }
    }

    #[test]
    fn triangles_everywhere_need_only_the_first_phase() {
        let g = clique(5).unwrap();
        let (o, m) = sinkless_low_degree(&g, 4, 0, &SinklessConfig::default()).unwrap();
        assert!(o.out_degrees(&g).iter().all(|&k| k >= 1));
        assert_eq!(m.phases.len(), 1);
    }

    #[test]
    fn cluster_trees_point_at_the_exit() {
        // threshold 1 gives c = 2 at d = 3; the cube has girth 4 <= 6, so use a
        // graph of girth 7 (the Heawood graph) with threshold 0 and c = 1
        let heawood: Vec<(usize, Option<usize>)> = (0..14)
            .map(|i| (i, Some((i + 1) % 14)))
            .chain((0..14).step_by(2).map(|i| (i, Some((i + 5) % 14))))
            .collect();
        let g = Graph::new(14, heawood).unwrap();
        let cfg = SinklessConfig { high_degree_threshold: 1, ..SinklessConfig::default() };
        assert_eq!(cluster_radius(3, 1), 1);
        // c = 1: cycles of length up to 3 are short, and there are none
        let (o, m) = sinkless_low_degree(&g, 3, 0, &cfg).unwrap();
        assert!(o.out_degrees(&g).iter().all(|&k| k >= 1));
        assert!(m.phases.iter().any(|p| p.phase == "contracted"));
    }

    #[test]
    fn cubic_graphs_are_oriented() {
        for seed in 0..3 {
            let g = generate(&Family::Regular { n: 300, delta: 3 }, seed).unwrap();
            let (o, _) = sinkless_low_degree(&g, 3, seed, &SinklessConfig::default()).unwrap();
            assert!(o.out_degrees(&g).iter().all(|&k| k >= 1));
        }
    }
}
