//! Recursive coloring through bounded-degree copies.
//!
//! Nodes are cut into copies of degree at most `x`, the copy graph is
//! colored with `2x - 1` colors, and each color class, whose degree is at
//! most `ceil(D / x)`, is colored recursively. Class `c` owns the block
//! `c * B .. (c + 1) * B` where `B` is the largest palette among the classes.

use crate::artifact::PaletteColoring;
use crate::error::{param, Result};
use crate::graph::virtualize::virtualize;
use crate::graph::{EdgeId, Graph};
use crate::sim::RunMetrics;

use super::base::base_color_with;

/// Palette bound `2^(1 + log D / log x) * D`.
pub fn coarse_bound(delta: usize, x: usize) -> f64 {
    if delta == 0 {
        return 0.0;
    }
    2f64.powf(1.0 + (delta as f64).ln() / (x as f64).ln()) * delta as f64
}

pub fn coarse_color(g: &Graph, x: usize, seed: u64) -> Result<(PaletteColoring, RunMetrics)> {
    if x < 2 {
        return Err(param(format!("x must be at least 2, got {x}")));
    }
    recurse(g, x, seed, 0)
}

fn recurse(g: &Graph, x: usize, seed: u64, depth: u64) -> Result<(PaletteColoring, RunMetrics)> {
    let delta = g.max_degree();
    let branch_seed = seed ^ depth.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    if delta <= 2 * x {
        return base_color_with(g, (2 * delta).saturating_sub(1), branch_seed);
    }
    let (copies, _) = virtualize(g, x)?;
    let (classes, mut metrics) = base_color_with(&copies, 2 * x - 1, branch_seed)?;
    let mut members: Vec<Vec<EdgeId>> = vec![Vec::new(); 2 * x - 1];
    for (e, &c) in classes.colors.iter().enumerate() {
        members[c as usize].push(e);
    }
    let mut children = Vec::with_capacity(members.len());
    let mut inner = RunMetrics::default();
    for (c, edges) in members.iter().enumerate() {
        let sub = g.edge_subgraph(edges);
        let (col, m) = recurse(&sub, x, seed ^ ((c as u64 + 1) << 40), depth + 1)?;
        inner.parallel(&m);
        children.push(col);
    }
    metrics.then("classes", inner.rounds, inner.messages);
    let block = children.iter().map(|c| c.palette_size).max().unwrap_or(0);
    let mut colors = vec![0u32; g.m()];
    for (c, (edges, col)) in members.iter().zip(&children).enumerate() {
        for (i, &e) in edges.iter().enumerate() {
            colors[e] = (c * block) as u32 + col.colors[i];
        }
    }
    Ok((PaletteColoring { palette_size: (2 * x - 1) * block, colors }, metrics))
}
