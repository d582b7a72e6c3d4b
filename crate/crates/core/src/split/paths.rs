//! Augmenting paths over an abstract move structure.
//!
//! A [`PathSpace`] says where a path may start, which edges it may take
//! next, and whether it may stop at a node. Two-colorings and orientations
//! both fit.

use std::collections::HashSet;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::artifact::{Color, TwoColoring};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugmentingPath {
    pub source: NodeId,
    /// `nodes[i] -edges[i]- nodes[i + 1]`.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

impl AugmentingPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn terminal(&self) -> NodeId {
        *self.nodes.last().unwrap()
    }

    /// Directed traversals `(edge, side of the node it leaves)`.
    pub fn traversals<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = (EdgeId, usize)> + 'a {
        self.edges.iter().zip(&self.nodes).map(move |(&e, &v)| (e, g.side(e, v)))
    }

    pub(crate) fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.edges.is_empty() || self.nodes.len() != self.edges.len() + 1 || self.nodes[0] != self.source {
            return Err(Error::InvalidPath("malformed path".into()));
        }
        for (i, &e) in self.edges.iter().enumerate() {
            if e >= g.m() || g.other(e, self.nodes[i]) != Some(self.nodes[i + 1]) {
                return Err(Error::InvalidPath(format!("edge {e} does not join step {i}")));
            }
        }
        let mut seen = HashSet::new();
        if !self.nodes.iter().all(|v| seen.insert(*v)) {
            return Err(Error::InvalidPath("path repeats a node".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrival<M> {
    Terminal,
    Continue(M),
}

pub trait PathSpace {
    /// What a walker carries from node to node.
    type Mode: Copy + Eq + Debug;

    fn graph(&self) -> &Graph;

    /// Start nodes in increasing order, each with its first mode.
    fn sources(&self) -> Vec<(NodeId, Self::Mode)>;

    /// Edges a walker in `mode` may leave `v` by, in increasing id order.
    fn moves(&self, v: NodeId, mode: Self::Mode, out: &mut Vec<EdgeId>);

    /// Reaching `w` over an edge taken in `mode`.
    fn arrive(&self, w: NodeId, mode: Self::Mode) -> Arrival<Self::Mode>;

    /// Whether `path` may be applied to the current state.
    fn validate(&self, path: &AugmentingPath) -> Result<()>;
}

/// Augmenting paths of a two-coloring at threshold `t`. A node is a source
/// with `t` edges of one color; a walker takes edges of its mode's color
/// and switches color at every node; it may stop at a node that can take one
/// more edge of the flipped color.
pub struct Undirected<'a> {
    pub graph: &'a Graph,
    pub coloring: &'a TwoColoring,
    pub t: usize,
}

impl Undirected<'_> {
    fn labelled(&self, v: NodeId, c: Color) -> bool {
        self.coloring.count(v, c) + 1 >= self.t
    }
}

impl PathSpace for Undirected<'_> {
    type Mode = Color;

    fn graph(&self) -> &Graph {
        self.graph
    }

    fn sources(&self) -> Vec<(NodeId, Color)> {
        (0..self.graph.n())
            .filter_map(|v| {
                [Color::Red, Color::Blue]
                    .into_iter()
                    .find(|&c| self.coloring.count(v, c) >= self.t)
                    .map(|c| (v, c))
            })
            .collect()
    }

    fn moves(&self, v: NodeId, mode: Color, out: &mut Vec<EdgeId>) {
        out.clear();
        for p in self.graph.ports(v) {
            if p.other().is_some() && self.coloring.color(p.edge()) == mode {
                out.push(p.edge());
            }
        }
    }

    fn arrive(&self, w: NodeId, mode: Color) -> Arrival<Color> {
        let next = mode.opposite();
        if self.labelled(w, next) {
            Arrival::Continue(next)
        } else {
            Arrival::Terminal
        }
    }

    fn validate(&self, path: &AugmentingPath) -> Result<()> {
        let g = self.graph;
        path.check_shape(g)?;
        let first = self.coloring.color(path.edges[0]);
        if self.coloring.count(path.source, first) < self.t {
            return Err(Error::InvalidPath(format!("node {} is not a source of its first color", path.source)));
        }
        let mut want = first;
        for (i, &e) in path.edges.iter().enumerate() {
            if self.coloring.color(e) != want {
                return Err(Error::InvalidPath(format!("edge {e} breaks the alternation")));
            }
            if i > 0 && !self.labelled(path.nodes[i], want) {
                return Err(Error::InvalidPath(format!("node {} is not labelled", path.nodes[i])));
            }
            want = want.opposite();
        }
        // `want` is now the color the last edge turns into
        if self.labelled(path.terminal(), want) {
            return Err(Error::InvalidPath(format!("node {} cannot take another edge", path.terminal())));
        }
        Ok(())
    }
}

/// Recolors the path in place; a path that no longer fits is rejected and
/// the coloring is left as it was.
pub fn augment(g: &Graph, coloring: &mut TwoColoring, t: usize, path: &AugmentingPath) -> Result<()> {
    Undirected { graph: g, coloring, t }.validate(path)?;
    for &e in &path.edges {
        coloring.flip(g, e);
    }
    Ok(())
}

/// Checks that paths start at distinct sources and never take the same
/// edge in the same direction.
pub fn check_almost_disjoint(g: &Graph, paths: &[AugmentingPath]) -> Result<()> {
    let mut sources = HashSet::new();
    let mut taken = HashSet::new();
    for p in paths {
        if !sources.insert(p.source) {
            return Err(Error::InvalidPath(format!("two paths start at {}", p.source)));
        }
        for tr in p.traversals(g) {
            if !taken.insert(tr) {
                return Err(Error::InvalidPath(format!("edge {} taken twice in one direction", tr.0)));
            }
        }
    }
    Ok(())
}

/// One accepted path per terminal node, the one with the smallest source.
pub fn accept_per_terminal(paths: &[AugmentingPath]) -> Vec<&AugmentingPath> {
    let mut best: std::collections::BTreeMap<NodeId, &AugmentingPath> = Default::default();
    for p in paths {
        best.entry(p.terminal()).and_modify(|q| {
            if p.source < q.source {
                *q = p;
            }
        }).or_insert(p);
    }
    let mut out: Vec<&AugmentingPath> = best.into_values().collect();
    out.sort_by_key(|p| p.source);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::cycle;

    fn path_graph(k: usize) -> Graph {
        Graph::new(k + 1, (0..k).map(|i| (i, Some(i + 1)))).unwrap()
    }

    #[test]
    fn single_edge_to_an_unlabelled_node() {
        // star with centre 0 and three leaves, all red, t = 3
        let g = Graph::new(4, [(0, Some(1)), (0, Some(2)), (0, Some(3))]).unwrap();
        let mut c = TwoColoring::uniform(&g, Color::Red);
        let space = Undirected { graph: &g, coloring: &c, t: 3 };
        assert_eq!(space.sources(), vec![(0, Color::Red)]);
        let p = AugmentingPath { source: 0, nodes: vec![0, 2], edges: vec![1] };
        augment(&g, &mut c, 3, &p).unwrap();
        assert_eq!(c.count(0, Color::Red), 2);
        assert_eq!(c.color(1), Color::Blue);
    }

    #[test]
    fn four_node_path_keeps_interior_degrees() {
        // t = 4: v1 has 4 blue; v2 labelled red; v3 labelled blue; v4 free
        let mut ends = vec![(0, Some(1)), (1, Some(2)), (2, Some(3))];
        let mut colors = vec![Color::Blue, Color::Red, Color::Blue];
        let mut next = 4;
        let mut pad = |v: usize, c: Color, k: usize, ends: &mut Vec<_>, colors: &mut Vec<_>| {
            for _ in 0..k {
                ends.push((v, Some(next)));
                colors.push(c);
                next += 1;
            }
        };
        pad(0, Color::Blue, 3, &mut ends, &mut colors);
        pad(1, Color::Red, 2, &mut ends, &mut colors);
        pad(2, Color::Blue, 2, &mut ends, &mut colors);
        let g = Graph::new(next, ends).unwrap();
        let mut c = TwoColoring::new(&g, colors).unwrap();
        let before: Vec<[usize; 2]> = (1..3).map(|v| [c.count(v, Color::Red), c.count(v, Color::Blue)]).collect();
        let p = AugmentingPath { source: 0, nodes: vec![0, 1, 2, 3], edges: vec![0, 1, 2] };
        augment(&g, &mut c, 4, &p).unwrap();
        let after: Vec<[usize; 2]> = (1..3).map(|v| [c.count(v, Color::Red), c.count(v, Color::Blue)]).collect();
        assert_eq!(before, after);
        assert_eq!(c.count(0, Color::Blue), 3);
        assert_eq!(c.count(3, Color::Red), 1);
        assert!(c.counts_consistent(&g));
    }

    #[test]
    fn stale_paths_are_rejected_without_change() {
        let g = path_graph(2);
        let mut c = TwoColoring::uniform(&g, Color::Red);
        let p = AugmentingPath { source: 1, nodes: vec![1, 2], edges: vec![1] };
        // with t = 3 node 1 is not a source
        assert!(augment(&g, &mut c, 3, &p).is_err());
        assert_eq!(c, TwoColoring::uniform(&g, Color::Red));
    }

    #[test]
    fn repeated_nodes_are_rejected() {
        let g = cycle(3).unwrap();
        let c = TwoColoring::uniform(&g, Color::Red);
        let space = Undirected { graph: &g, coloring: &c, t: 2 };
        let p = AugmentingPath { source: 0, nodes: vec![0, 1, 2, 0], edges: vec![0, 1, 2] };
        assert!(space.validate(&p).is_err());
    }

    #[test]
    fn acceptance_prefers_small_sources() {
        let a = AugmentingPath { source: 5, nodes: vec![5, 1], edges: vec![0] };
        let b = AugmentingPath { source: 2, nodes: vec![2, 1], edges: vec![1] };
        let c = AugmentingPath { source: 7, nodes: vec![7, 3], edges: vec![2] };
        let all = [a, b.clone(), c.clone()];
        let acc = accept_per_terminal(&all);
        assert_eq!(acc, vec![&b, &c]);
    }
}
