//! Seeded graph families.

use std::collections::{BinaryHeap, HashSet};
use std::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, NodeId};
use crate::error::{param, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cycle { n: usize },
    Clique { n: usize },
    /// Random simple `delta`-regular graph.
    Regular { n: usize, delta: usize },
    Gnp { n: usize, p: f64 },
    /// Union of `a` independent uniform random spanning trees; arboricity at most `a`.
    ForestUnion { n: usize, a: usize },
    Tree { n: usize },
}

pub fn generate(family: &Family, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *family {
        Family::Cycle { n } => cycle(n),
        Family::Clique { n } => clique(n),
        Family::Regular { n, delta } => regular(n, delta, &mut rng),
        Family::Gnp { n, p } => gnp(n, p, &mut rng),
        Family::ForestUnion { n, a } => forest_union(n, a, &mut rng),
        Family::Tree { n } => {
            let edges = random_tree(n, &mut rng);
            Graph::new(n, edges.into_iter().map(|(u, v)| (u, Some(v))))
        }
    }
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(param(format!("cycle needs n >= 3, got {n}")));
    }
    Graph::new(n, (0..n).map(|i| (i, Some((i + 1) % n))))
}

pub fn clique(n: usize) -> Result<Graph> {
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, Some(v)));
        }
    }
    Graph::new(n, edges)
}

/// Configuration model; loops and repeated pairs are removed by random
/// switches with other pairs until the pairing is simple. Dense requests
/// take the complement of a sparse one.
fn regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(param(format!("no simple {d}-regular graph on {n} nodes")));
    }
    if 2 * d > n - 1 {
        let co = regular(n, n - 1 - d, rng)?;
        let mut adj = vec![false; n * n];
        for (_, a, b) in co.edges() {
            let b = b.unwrap();
            adj[a * n + b] = true;
            adj[b * n + a] = true;
        }
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        let edges: Vec<_> = edges.filter(|&(u, v)| !adj[u * n + v]).map(|(u, v)| (u, Some(v))).collect();
        return Graph::new(n, edges);
    }
    let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    stubs.shuffle(rng);
    let mut pairs: Vec<(u32, u32)> = stubs.chunks_exact(2).map(|c| ordered(c[0], c[1])).collect();
    drop(stubs);

    let mut present: HashSet<u64> = HashSet::with_capacity(pairs.len());
    let mut bad = Vec::new();
    for (i, &(u, v)) in pairs.iter().enumerate() {
        if u == v || !present.insert(key(u, v)) {
            bad.push(i);
        }
    }
    let mut good: Vec<usize> = {
        let mut is_bad = vec![false; pairs.len()];
        for &i in &bad {
            is_bad[i] = true;
        }
        (0..pairs.len()).filter(|&i| !is_bad[i]).collect()
    };

    let budget = 1000 * (bad.len() + 1) + 100_000;
    let mut attempts = 0;
    while let Some(&i) = bad.last() {
        attempts += 1;
        if attempts > budget || good.is_empty() {
            return Err(Error::Generator(format!(
                "could not repair pairing for regular({n}, {d})"
            )));
        }
        let slot = rng.random_range(0..good.len());
        let j = good[slot];
        let (u, v) = pairs[i];
        let (mut x, mut y) = pairs[j];
        if rng.random_bool(0.5) {
            std::mem::swap(&mut x, &mut y);
        }
        if u == x || v == y {
            continue;
        }
        let (p, q) = (ordered(u, x), ordered(v, y));
        if p == q || present.contains(&key(p.0, p.1)) || present.contains(&key(q.0, q.1)) {
            continue;
        }
        present.remove(&key(pairs[j].0, pairs[j].1));
        present.insert(key(p.0, p.1));
        present.insert(key(q.0, q.1));
        pairs[i] = p;
        pairs[j] = q;
        bad.pop();
        good.push(i);
    }
    pairs.sort_unstable();
    Graph::new(n, pairs.into_iter().map(|(u, v)| (u as NodeId, Some(v as NodeId))))
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn key(a: u32, b: u32) -> u64 {
    ((a as u64) << 32) | b as u64
}

/// Skips between successes with geometric jumps.
fn gnp(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(param(format!("p must lie in [0, 1], got {p}")));
    }
    let mut edges = Vec::new();
    if p > 0.0 && n > 1 {
        if p >= 1.0 {
            return clique(n);
        }
        let lq = (1.0 - p).ln();
        let (mut v, mut w): (i64, i64) = (1, -1);
        let n = n as i64;
        while v < n {
            let r: f64 = rng.random::<f64>();
            w += 1 + ((1.0 - r).ln() / lq).floor() as i64;
            while w >= v && v < n {
                w -= v;
                v += 1;
            }
            if v < n {
                edges.push((w as usize, v as usize));
            }
        }
    }
    edges.sort_unstable();
    Graph::new(n, edges.into_iter().map(|(u, v)| (u, Some(v))))
}

fn forest_union(n: usize, a: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    if a == 0 {
        return Err(param("forest_union needs a >= 1"));
    }
    let mut edges = Vec::with_capacity(a * n.saturating_sub(1));
    for _ in 0..a {
        edges.extend(random_tree(n, rng).into_iter().map(|(u, v)| (u, Some(v))));
    }
    Graph::new(n, edges)
}

/// Uniform labelled tree from a random Pruefer sequence.
fn random_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    if n < 2 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf.min(c), leaf.max(c)));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(u) = leaves.pop().unwrap();
    let Reverse(v) = leaves.pop().unwrap();
    edges.push((u.min(v), u.max(v)));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_needs_three_nodes() {
        assert!(cycle(2).is_err());
        let g = cycle(5).unwrap();
        assert!(g.is_regular(2));
        assert_eq!(g.m(), 5);
    }

    #[test]
    fn clique_edge_count() {
        let g = clique(6).unwrap();
        assert_eq!(g.m(), 15);
        assert!(g.is_regular(5));
    }

    #[test]
    fn regular_is_simple_and_regular() {
        for (n, d, seed) in [(10, 3, 1), (100, 4, 2), (50, 49, 3), (64, 32, 4), (1000, 16, 5)] {
            let g = generate(&Family::Regular { n, delta: d }, seed).unwrap();
            assert!(g.is_regular(d), "regular({n},{d})");
            let mut seen = HashSet::new();
            for (_, a, b) in g.edges() {
                let b = b.unwrap();
                assert_ne!(a, b);
                assert!(seen.insert((a.min(b), a.max(b))), "repeated pair");
            }
        }
    }

    #[test]
    fn regular_rejects_odd_product() {
        assert!(generate(&Family::Regular { n: 5, delta: 3 }, 0).is_err());
        assert!(generate(&Family::Regular { n: 4, delta: 4 }, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let f = Family::Gnp { n: 80, p: 0.1 };
        assert_eq!(generate(&f, 9).unwrap(), generate(&f, 9).unwrap());
        assert_ne!(generate(&f, 9).unwrap(), generate(&f, 10).unwrap());
    }

    #[test]
    fn gnp_extremes() {
        assert_eq!(generate(&Family::Gnp { n: 7, p: 0.0 }, 1).unwrap().m(), 0);
        assert_eq!(generate(&Family::Gnp { n: 7, p: 1.0 }, 1).unwrap().m(), 21);
    }

    #[test]
    fn tree_is_spanning_and_acyclic() {
        let g = generate(&Family::Tree { n: 200 }, 3).unwrap();
        assert_eq!(g.m(), 199);
        assert_eq!(g.components().count, 1);
    }

    #[test]
    fn forest_union_counts() {
        let g = generate(&Family::ForestUnion { n: 30, a: 4 }, 3).unwrap();
        assert_eq!(g.m(), 4 * 29);
    }
}
