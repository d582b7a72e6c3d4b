//! Proper edge colorings.

pub mod base;
pub mod coarse;
pub mod fine;
pub mod randomized;

pub use base::{base_color, base_color_with};
pub use coarse::{coarse_bound, coarse_color};
pub use fine::{fine_color, fine_plan, FineConfig, FinePlan};
pub use randomized::{part_count, randomized_color, RandomizedColorConfig, RandomizedColorReport};

#[cfg(test)]
pub(crate) fn first_conflict(g: &crate::graph::Graph, c: &crate::artifact::PaletteColoring) -> Option<(usize, usize)> {
    for v in 0..g.n() {
        let mut seen = std::collections::HashMap::new();
        for p in g.ports(v) {
            if let Some(f) = seen.insert(c.colors[p.edge()], p.edge()) {
                return Some((f, p.edge()));
            }
        }
    }
    None
}
