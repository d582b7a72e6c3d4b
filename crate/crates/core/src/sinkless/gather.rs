//! Sinkless orientation for any minimum degree by gathering components.
//!
//! Each component roots itself at its half-edges, or failing that at one
//! cycle which is oriented around; every other node points its edge toward
//! the nearest root. Cost is linear in the component diameter.

use std::collections::VecDeque;

use crate::artifact::Orientation;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};
use crate::sim::RunMetrics;

const UNSET: usize = usize::MAX;

struct Tree {
    parent: Vec<Option<EdgeId>>,
    depth: Vec<usize>,
    /// First non-tree edge met, from the endpoint that found it.
    chord: Option<(NodeId, NodeId, EdgeId)>,
    far: usize,
}

fn tree_and_chord(g: &Graph, s: NodeId) -> Tree {
    let mut parent = vec![None; g.n()];
    let mut depth = vec![UNSET; g.n()];
    depth[s] = 0;
    let mut chord = None;
    let mut far = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        far = far.max(depth[v]);
        for p in g.ports(v) {
            let Some(w) = p.other() else { continue };
            if parent[v] == Some(p.edge()) {
                continue;
            }
            if depth[w] == UNSET {
                depth[w] = depth[v] + 1;
                parent[w] = Some(p.edge());
                queue.push_back(w);
            } else if chord.is_none() {
                chord = Some((v, w, p.edge()));
            }
        }
    }
    Tree { parent, depth, chord, far }
}

pub fn sinkless_by_gathering(g: &Graph) -> Result<(Orientation, RunMetrics)> {
    let mut tail = vec![UNSET; g.m()];
    let mut rounds = 0;
    for members in g.components().members() {
        let mut roots: Vec<NodeId> =
            members.iter().copied().filter(|&v| g.ports(v).iter().any(|p| p.other().is_none())).collect();
        let Tree { parent, depth, chord, far } = tree_and_chord(g, members[0]);
        if roots.is_empty() {
            if g.degree(members[0]) == 0 {
                continue;
            }
            let Some((v, w, e)) = chord else {
                return Err(Error::Precondition(format!("the component of node {} is a tree", members[0])));
            };
            tail[e] = v;
            roots.extend([v, w]);
            let up = |x: NodeId| g.other(parent[x].unwrap(), x).unwrap();
            let (mut a, mut b) = (v, w);
            // climb to the common ancestor; edges on w's side point up, on v's side down
            while a != b {
                if depth[a] >= depth[b] {
                    let pa = up(a);
                    tail[parent[a].unwrap()] = pa;
                    a = pa;
                    roots.push(a);
                } else {
                    let pb = up(b);
                    tail[parent[b].unwrap()] = b;
                    b = pb;
                    roots.push(b);
                }
            }
        }
        for &v in &members {
            for p in g.ports(v).iter().filter(|p| p.other().is_none()) {
                tail[p.edge()] = v;
            }
        }
        let mut seen = vec![false; g.n()];
        let mut queue: VecDeque<(NodeId, usize)> = VecDeque::new();
        for &r in &roots {
            if !seen[r] {
                seen[r] = true;
                queue.push_back((r, 0));
            }
        }
        let mut layers = 0;
        while let Some((x, d)) = queue.pop_front() {
            layers = layers.max(d);
            for p in g.ports(x) {
                let Some(y) = p.other() else { continue };
                if !seen[y] {
                    seen[y] = true;
                    tail[p.edge()] = y;
                    queue.push_back((y, d + 1));
                }
            }
        }
        rounds = usize::max(rounds, 2 * far + layers + 1);
    }
    for (e, a, _) in g.edges() {
        if tail[e] == UNSET {
            tail[e] = a;
        }
    }
    Ok((Orientation::from_tails(tail), RunMetrics::phase("gather", rounds, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{cycle, generate, Family};

    fn sinkless(g: &Graph, o: &Orientation) -> bool {
        let out = o.out_degrees(g);
        (0..g.n()).all(|v| g.degree(v) == 0 || out[v] > 0)
    }

    #[test]
    fn cycles_are_oriented_around() {
        for n in 3..12 {
            let g = cycle(n).unwrap();
            let (o, _) = sinkless_by_gathering(&g).unwrap();
            assert!(sinkless(&g, &o));
            assert_eq!(o.max_out_degree(&g), 1);
        }
    }

    #[test]
    fn trees_have_no_answer_unless_a_half_edge_helps() {
        let g = generate(&Family::Tree { n: 20 }, 1).unwrap();
        assert!(matches!(sinkless_by_gathering(&g), Err(Error::Precondition(_))));
        let mut ends: Vec<(usize, Option<usize>)> = g.edges().map(|(_, a, b)| (a, b)).collect();
        ends.push((7, None));
        let h = Graph::new(20, ends).unwrap();
        let (o, _) = sinkless_by_gathering(&h).unwrap();
        assert!(sinkless(&h, &o));
    }

    #[test]
    fn parallel_edges_form_a_cycle() {
        let g = Graph::new(3, [(0, Some(1)), (0, Some(1)), (1, Some(2))]).unwrap();
        let (o, _) = sinkless_by_gathering(&g).unwrap();
        assert!(sinkless(&g, &o));
    }

    #[test]
    fn random_graphs_with_cycles() {
        for seed in 0..20 {
            let g = generate(&Family::Gnp { n: 60, p: 0.06 }, seed).unwrap();
            match sinkless_by_gathering(&g) {
                Ok((o, _)) => assert!(sinkless(&g, &o)),
                Err(Error::Precondition(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}
