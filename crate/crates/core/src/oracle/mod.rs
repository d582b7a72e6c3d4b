//! Sequential ground truth and exact postcondition checks.

pub mod euler;
pub mod exact;

pub use euler::euler_split;
pub use exact::{
    arboricity_by_subsets, arboricity_exact_small, min_max_outdegree_by_subsets, min_max_outdegree_exact, MaxFlow,
    ARBORICITY_CAP, OUTDEGREE_CAP,
};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::artifact::{Color, ForestDecomposition, Orientation, PaletteColoring, TwoColoring};
use crate::error::{param, Error, Result};
use crate::graph::{EdgeId, Graph, NodeId};

#[derive(Clone, Copy, Debug)]
pub enum Artifact<'a> {
    Orientation(&'a Orientation),
    TwoColoring(&'a TwoColoring),
    Palette(&'a PaletteColoring),
    Forests(&'a ForestDecomposition),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contract {
    Sinkless,
    InOutBounds { din: usize, dout: usize },
    Balance { t: usize },
    Proper,
    Forests { stars: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Node(NodeId),
    Edge(EdgeId),
    EdgePair(EdgeId, EdgeId),
    Cycle(Vec<EdgeId>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ValidationReport {
    fn push(&mut self, name: &str, witness: Option<Witness>) {
        self.checks.push(Check { name: name.to_string(), pass: witness.is_none(), witness });
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn covers(len: usize, g: &Graph) -> Result<()> {
    if len != g.m() {
        return Err(Error::IncompleteArtifact { edge: len.min(g.m()) });
    }
    Ok(())
}

pub fn check(g: &Graph, artifact: Artifact<'_>, contract: Contract) -> Result<ValidationReport> {
    let mut report = ValidationReport { checks: Vec::new(), pass: true };
    match (artifact, contract) {
        (Artifact::Orientation(o), Contract::Sinkless) => {
            o.validate(g)?;
            let out = out_degrees(g, o);
            report.push("sinkless", (0..g.n()).find(|&v| g.degree(v) > 0 && out[v] == 0).map(Witness::Node));
        }
        (Artifact::Orientation(o), Contract::InOutBounds { din, dout }) => {
            o.validate(g)?;
            let out = out_degrees(g, o);
            let inn: Vec<usize> = (0..g.n()).map(|v| g.degree(v) - out[v]).collect();
            report.push("out_degree", (0..g.n()).find(|&v| out[v] > dout).map(Witness::Node));
            report.push("in_degree", (0..g.n()).find(|&v| inn[v] > din).map(Witness::Node));
        }
        (Artifact::TwoColoring(c), Contract::Balance { t }) => {
            covers(c.len(), g)?;
            let witness = (0..g.n()).find(|&v| {
                let red = g.ports(v).iter().filter(|p| c.color(p.edge()) == Color::Red).count();
                red > t || g.degree(v) - red > t
            });
            report.push("balance", witness.map(Witness::Node));
        }
        (Artifact::Palette(c), Contract::Proper) => {
            covers(c.colors.len(), g)?;
            let range = c.colors.iter().position(|&k| k as usize >= c.palette_size);
            report.push("palette", range.map(Witness::Edge));
            report.push("proper", proper_conflict(g, c).map(|(a, b)| Witness::EdgePair(a, b)));
        }
        (Artifact::Forests(f), Contract::Forests { stars }) => {
            covers(f.assignment.len(), g)?;
            if f.star_flags.len() != f.forests {
                return Err(Error::MalformedArtifact("star_flags length differs from forests".into()));
            }
            let stray = f.assignment.iter().position(|&k| k as usize >= f.forests);
            report.push("partition", stray.map(Witness::Edge));
            if stray.is_none() {
                report.push("acyclic", first_cycle(g, f).map(Witness::Cycle));
                if stars {
                    report.push("stars", first_long_star(g, f).map(Witness::Edge));
                }
            }
        }
        (a, c) => return Err(param(format!("contract {c:?} does not apply to {}", kind(a)))),
    }
    Ok(report)
}

fn kind(a: Artifact<'_>) -> &'static str {
    match a {
        Artifact::Orientation(_) => "an orientation",
        Artifact::TwoColoring(_) => "a two-coloring",
        Artifact::Palette(_) => "a palette coloring",
        Artifact::Forests(_) => "a forest decomposition",
    }
}

fn out_degrees(g: &Graph, o: &Orientation) -> Vec<usize> {
    let mut out = vec![0; g.n()];
    for e in 0..g.m() {
        out[o.tail(e)] += 1;
    }
    out
}

fn proper_conflict(g: &Graph, c: &PaletteColoring) -> Option<(EdgeId, EdgeId)> {
    let mut best: Option<(EdgeId, EdgeId)> = None;
    for v in 0..g.n() {
        let mut at: Vec<(u32, EdgeId)> = g.ports(v).iter().map(|p| (c.colors[p.edge()], p.edge())).collect();
        at.sort_unstable();
        for w in at.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
                let pair = (w[0].1, w[1].1);
                if best.is_none_or(|b| pair < b) {
                    best = Some(pair);
                }
            }
        }
    }
    best
}

/// Cycle closed by the first edge, in id order, whose endpoints are already
/// joined inside its forest.
fn first_cycle(g: &Graph, f: &ForestDecomposition) -> Option<Vec<EdgeId>> {
    let mut adj: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); g.n()];
    let mut parent: Vec<Option<Vec<usize>>> = vec![None; f.forests];
    for e in 0..g.m() {
        let Some((a, b)) = g.full_endpoints(e) else { continue };
        let k = f.assignment[e] as usize;
        let p = parent[k].get_or_insert_with(|| (0..g.n()).collect());
        let (ra, rb) = (find(p, a), find(p, b));
        if ra == rb {
            let mut cycle = tree_path(&adj, k, f, a, b);
            cycle.push(e);
            return Some(cycle);
        }
        p[ra] = rb;
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    None
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Edges of the path from `a` to `b` inside forest `k`.
fn tree_path(adj: &[Vec<(NodeId, EdgeId)>], k: usize, f: &ForestDecomposition, a: NodeId, b: NodeId) -> Vec<EdgeId> {
    let mut prev: Vec<Option<(NodeId, EdgeId)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            break;
        }
        for &(w, e) in &adj[v] {
            if f.assignment[e] as usize == k && !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = b;
    while let Some((u, e)) = prev[v] {
        path.push(e);
        v = u;
    }
    path.reverse();
    path
}

/// An edge of a star-flagged forest with both ends of degree at least two;
/// a forest has one exactly when some component has diameter above two.
fn first_long_star(g: &Graph, f: &ForestDecomposition) -> Option<EdgeId> {
    let mut deg: Vec<Vec<usize>> = vec![Vec::new(); f.forests];
    for e in 0..g.m() {
        let k = f.assignment[e] as usize;
        if !f.star_flags[k] {
            continue;
        }
        let d = &mut deg[k];
        if d.is_empty() {
            d.resize(g.n(), 0);
        }
        let (a, b) = g.endpoints(e);
        d[a] += 1;
        if let Some(b) = b {
            d[b] += 1;
        }
    }
    (0..g.m()).find(|&e| {
        let k = f.assignment[e] as usize;
        if !f.star_flags[k] {
            return false;
        }
        // a half-edge ends at a leaf of its own
        match g.endpoints(e) {
            (a, Some(b)) => deg[k][a] >= 2 && deg[k][b] >= 2,
            (_, None) => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, cycle};

    #[test]
    fn oriented_cycle_is_sinkless() {
        let g = cycle(6).unwrap();
        let o = Orientation::from_tails((0..6).map(|e| g.endpoints(e).0).collect());
        let r = check(&g, Artifact::Orientation(&o), Contract::Sinkless).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn inward_star_names_its_center() {
        let g = Graph::new(5, (1..5).map(|v| (0, Some(v)))).unwrap();
        let o = Orientation::from_tails((1..5).collect());
        let r = check(&g, Artifact::Orientation(&o), Contract::Sinkless).unwrap();
        assert!(!r.pass);
        assert_eq!(r.first_failure().unwrap().witness, Some(Witness::Node(0)));
    }

    #[test]
    fn tampered_coloring_names_the_pair() {
        let g = clique(4).unwrap();
        let mut c = PaletteColoring { palette_size: 5, colors: vec![0, 1, 2, 2, 1, 0] };
        assert!(check(&g, Artifact::Palette(&c), Contract::Proper).unwrap().pass);
        c.colors[1] = 0;
        let r = check(&g, Artifact::Palette(&c), Contract::Proper).unwrap();
        assert_eq!(r.first_failure().unwrap().witness, Some(Witness::EdgePair(0, 1)));
    }

    #[test]
    fn forest_cycles_and_long_stars_are_found() {
        let g = cycle(4).unwrap();
        let f = ForestDecomposition { forests: 1, assignment: vec![0; 4], star_flags: vec![false] };
        let r = check(&g, Artifact::Forests(&f), Contract::Forests { stars: false }).unwrap();
        match &r.first_failure().unwrap().witness {
            Some(Witness::Cycle(c)) => assert_eq!(c.len(), 4),
            w => panic!("unexpected witness {w:?}"),
        }
        let f = ForestDecomposition { forests: 2, assignment: vec![0, 0, 0, 1], star_flags: vec![true, true] };
        let r = check(&g, Artifact::Forests(&f), Contract::Forests { stars: true }).unwrap();
        assert_eq!(r.first_failure().unwrap().witness, Some(Witness::Edge(1)));
    }

    #[test]
    fn short_artifacts_are_refused() {
        let g = cycle(5).unwrap();
        let o = Orientation::from_tails(vec![0, 1]);
        assert!(matches!(
            check(&g, Artifact::Orientation(&o), Contract::Sinkless),
            Err(Error::IncompleteArtifact { .. })
        ));
        let o = Orientation::lower_to_higher(&g);
        assert!(check(&g, Artifact::Orientation(&o), Contract::Proper).is_err());
    }
}
