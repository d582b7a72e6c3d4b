//! Node splitting into bounded-degree copies.
//!
//! A node of degree `deg` gets `max(1, ceil(deg / d))` copies. Copy 0 keeps
//! the original id; further copies get fresh ids `n, n + 1, ..` in node
//! order. The node's edges are dealt to its copies in adjacency order, `d`
//! at a time. Edge ids are unchanged, so edge colorings carry over as-is.

use super::{Graph, NodeId};
use crate::artifact::Orientation;
use crate::error::{param, Error, Result};

#[derive(Clone, Debug)]
pub struct VirtualizationMap {
    /// Copy id to original node.
    pub owner: Vec<NodeId>,
    /// Copy ids of each original node; the first one is the node itself.
    pub copies: Vec<Vec<NodeId>>,
}

impl VirtualizationMap {
    pub fn original_n(&self) -> usize {
        self.copies.len()
    }

    /// Maps an orientation of the copy graph to one of the original graph.
    pub fn devirtualize_orientation(&self, original: &Graph, o: &Orientation) -> Result<Orientation> {
        if o.len() != original.m() {
            return Err(Error::IncompleteArtifact { edge: o.len().min(original.m()) });
        }
        let tail = (0..original.m()).map(|e| self.owner[o.tail(e)]).collect();
        Ok(Orientation::from_tails(tail))
    }
}

pub fn virtualize(g: &Graph, d: usize) -> Result<(Graph, VirtualizationMap)> {
    if d == 0 {
        return Err(param("virtualization degree must be positive"));
    }
    let n = g.n();
    let mut owner: Vec<NodeId> = (0..n).collect();
    let mut copies: Vec<Vec<NodeId>> = (0..n).map(|v| vec![v]).collect();
    // copy of each (edge, side)
    let mut at = vec![[usize::MAX; 2]; g.m()];
    for v in 0..n {
        for (i, p) in g.ports(v).iter().enumerate() {
            let k = i / d;
            while copies[v].len() <= k {
                copies[v].push(owner.len());
                owner.push(v);
            }
            at[p.edge()][g.side(p.edge(), v)] = copies[v][k];
        }
    }
    let edges = g.edges().map(|(e, _, b)| (at[e][0], b.map(|_| at[e][1])));
    let h = Graph::new(owner.len(), edges)?;
    Ok((h, VirtualizationMap { owner, copies }))
}
