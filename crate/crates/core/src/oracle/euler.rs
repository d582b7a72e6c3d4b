//! Two-coloring by alternating along Euler tours.
//!
//! A dummy node takes every half-edge and one extra edge per node of odd
//! degree, which makes all degrees even. Each component is toured from its
//! smallest node, the dummy counting as smaller than every real node, and
//! the tour's edges are colored red and blue in turn.

use crate::artifact::{Color, TwoColoring};
use crate::graph::{EdgeId, Graph, NodeId};

pub fn euler_split(g: &Graph) -> TwoColoring {
    let n = g.n();
    let dummy = n;
    // (a, b, real edge id if any)
    let mut ends: Vec<(NodeId, NodeId, Option<EdgeId>)> = g
        .edges()
        .map(|(e, a, b)| (a, b.unwrap_or(dummy), Some(e)))
        .collect();
    let mut parity = vec![0usize; n + 1];
    for &(a, b, _) in &ends {
        parity[a] ^= 1;
        parity[b] ^= 1;
    }
    for v in 0..n {
        if parity[v] == 1 {
            ends.push((v, dummy, None));
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, &(a, b, _)) in ends.iter().enumerate() {
        adj[a].push(i);
        adj[b].push(i);
    }
    let mut used = vec![false; ends.len()];
    let mut next = vec![0usize; n + 1];
    let mut colors = vec![Color::Red; g.m()];
    let order = std::iter::once(dummy).chain(0..n);
    for start in order {
        if next[start] == adj[start].len() || adj[start].iter().all(|&i| used[i]) {
            continue;
        }
        // Hierholzer: the circuit comes out in reverse, which keeps alternation
        let mut tour: Vec<usize> = Vec::new();
        let mut stack: Vec<(NodeId, Option<usize>)> = vec![(start, None)];
        while let Some(&(v, via)) = stack.last() {
            while next[v] < adj[v].len() && used[adj[v][next[v]]] {
                next[v] += 1;
            }
            if next[v] == adj[v].len() {
                stack.pop();
                if let Some(i) = via {
                    tour.push(i);
                }
                continue;
            }
            let i = adj[v][next[v]];
            used[i] = true;
            let (a, b, _) = ends[i];
            stack.push((if a == v { b } else { a }, Some(i)));
        }
        for (k, &i) in tour.iter().enumerate() {
            if let Some(e) = ends[i].2 {
                colors[e] = if k % 2 == 0 { Color::Red } else { Color::Blue };
            }
        }
    }
    TwoColoring::new(g, colors).expect("one color per edge")
}
