//! `(2 + eps) D` edge coloring by repeated balanced splitting.
//!
//! While the degree bound is above the split threshold every part is split
//! in two with slack `eps' = eps / (2 log2 D)`; the `2^t` leaves are then
//! colored with disjoint blocks of `2 D_t - 1` colors.

use serde::{Deserialize, Serialize};

use crate::artifact::{Color, PaletteColoring};
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph};
use crate::sim::RunMetrics;
use crate::split::{balanced_split_high, log15, Hypotheses, SplitConfig};

use super::base::base_color_with;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FineConfig {
    /// Replaces `ceil(32 log_1.5 m / eps'^2)`.
    pub threshold: Option<usize>,
    pub split: SplitConfig,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinePlan {
    pub eps_prime: f64,
    pub threshold: usize,
    /// Degree bound at each depth, `D_0 = D`.
    pub degrees: Vec<usize>,
}

impl FinePlan {
    pub fn depth(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn palette(&self) -> usize {
        let last = *self.degrees.last().unwrap();
        (2 * last).saturating_sub(1) << self.depth()
    }
}

pub fn fine_plan(g: &Graph, eps: f64, threshold: Option<usize>) -> Result<FinePlan> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let delta = g.max_degree();
    let eps_prime = if delta >= 2 { eps / (2.0 * (delta as f64).log2()) } else { eps };
    let threshold = threshold.unwrap_or_else(|| (32.0 * log15(g.m()) / (eps_prime * eps_prime)).ceil() as usize);
    let mut degrees = vec![delta];
    while *degrees.last().unwrap() > threshold.max(1) {
        let d = *degrees.last().unwrap();
        degrees.push(((1.0 + eps_prime) * d as f64 / 2.0).floor() as usize);
    }
    Ok(FinePlan { eps_prime, threshold, degrees })
}

pub fn fine_color(g: &Graph, eps: f64, cfg: &FineConfig) -> Result<(PaletteColoring, RunMetrics)> {
    let plan = fine_plan(g, eps, cfg.threshold)?;
    // the loop condition already bounds each part's degree
    let split_cfg = SplitConfig { hypotheses: Hypotheses::Relax, ..cfg.split.clone() };
    let mut parts: Vec<Vec<EdgeId>> = vec![(0..g.m()).collect()];
    let mut metrics = RunMetrics::default();
    for level in 1..=plan.depth() {
        let bound = plan.degrees[level];
        let mut next = Vec::with_capacity(parts.len() * 2);
        let mut round = RunMetrics::default();
        for part in &parts {
            let sub = g.edge_subgraph(part);
            let out = balanced_split_high(&sub, plan.eps_prime, &split_cfg)?;
            if out.coloring.max_color_degree() > bound {
                return Err(Error::Invariant(format!("split part exceeds degree {bound}")));
            }
            round.parallel(&out.metrics);
            let (mut red, mut blue) = (Vec::new(), Vec::new());
            for (i, &e) in part.iter().enumerate() {
                match out.coloring.color(i) {
                    Color::Red => red.push(e),
                    Color::Blue => blue.push(e),
                }
            }
            next.push(red);
            next.push(blue);
        }
        metrics.then(&format!("split-{level}"), round.rounds, round.messages);
        parts = next;
    }
    let last = *plan.degrees.last().unwrap();
    let block = (2 * last).saturating_sub(1);
    let mut colors = vec![0u32; g.m()];
    let mut leaves = RunMetrics::default();
    for (k, part) in parts.iter().enumerate() {
        let sub = g.edge_subgraph(part);
        let (col, m) = base_color_with(&sub, block, cfg.seed ^ k as u64)?;
        leaves.parallel(&m);
        for (i, &e) in part.iter().enumerate() {
            colors[e] = (k * block) as u32 + col.colors[i];
        }
    }
    metrics.then("base-color", leaves.rounds, leaves.messages);
    Ok((PaletteColoring { palette_size: plan.palette(), colors }, metrics))
}
