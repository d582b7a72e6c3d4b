//! Proper edge coloring with `2D - 1` colors by random trials.
//!
//! In every trial the lower endpoint of each uncolored edge proposes a color
//! that, as far as it knows, is free at both ends. An endpoint approves a
//! proposal when the color is still free there and no other proposal at
//! that node uses it; the edge keeps the color when both endpoints approve.
//! Approval rounds also carry each node's set of used colors.

use std::sync::Arc;

use rand::Rng;

use crate::artifact::PaletteColoring;
use crate::error::{param, Error, Result};
use crate::graph::Graph;
use crate::sim::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};

pub const MAX_ROUNDS: usize = 20_000;

type Bits = Arc<Vec<u64>>;

#[derive(Clone, Debug)]
enum Note {
    Propose(u32),
    Approve(bool, Bits),
    Used(Bits),
}

#[derive(Debug, Default)]
struct PortState {
    color: Option<u32>,
    owner: bool,
    half: bool,
    /// Color proposed on this edge in the current trial.
    proposal: Option<u32>,
    approve: bool,
    theirs: Option<Bits>,
}

#[derive(Debug)]
struct State {
    used: Vec<u64>,
    ports: Vec<PortState>,
    left: usize,
}

struct Trials {
    palette: usize,
}

fn has(bits: &[u64], c: usize) -> bool {
    bits[c / 64] >> (c % 64) & 1 == 1
}

fn put(bits: &mut [u64], c: usize) {
    bits[c / 64] |= 1 << (c % 64);
}

impl Trials {
    fn words(&self) -> usize {
        self.palette.div_ceil(64).max(1)
    }

    fn propose(&self, s: &mut State, out: &mut Outbox<'_, Note>, rng: &mut NodeRng) {
        let mut taken = s.used.clone();
        let tail = self.palette % 64;
        if tail != 0 {
            let last = taken.len() - 1;
            taken[last] |= !0u64 << tail;
        }
        for (i, p) in s.ports.iter_mut().enumerate() {
            p.proposal = None;
            if p.color.is_some() || !p.owner {
                continue;
            }
            let free: Vec<u64> = match &p.theirs {
                Some(t) => taken.iter().zip(t.iter()).map(|(a, b)| !(a | b)).collect(),
                None => taken.iter().map(|a| !a).collect(),
            };
            let count: u32 = free.iter().map(|w| w.count_ones()).sum();
            if count == 0 {
                continue;
            }
            let mut k = rng.random_range(0..count);
            let mut pick = 0;
            for (wi, &w) in free.iter().enumerate() {
                let ones = w.count_ones();
                if k < ones {
                    let mut w = w;
                    for _ in 0..k {
                        w &= w - 1;
                    }
                    pick = wi * 64 + w.trailing_zeros() as usize;
                    break;
                }
                k -= ones;
            }
            put(&mut taken, pick);
            p.proposal = Some(pick as u32);
            if !p.half {
                out.send(i, Note::Propose(pick as u32));
            }
        }
    }
}

impl NodeProgram for Trials {
    type State = State;
    type Msg = Note;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Note>, rng: &mut NodeRng) -> (State, Status) {
        let ports: Vec<PortState> = ctx
            .ports()
            .iter()
            .map(|p| match p.other() {
                Some(w) => PortState { owner: ctx.id < w, ..PortState::default() },
                None => PortState { owner: true, half: true, ..PortState::default() },
            })
            .collect();
        let left = ports.len();
        let mut s = State { used: vec![0; self.words()], ports, left };
        if left == 0 {
            return (s, Status::Halted);
        }
        self.propose(&mut s, out, rng);
        (s, Status::Running)
    }

    fn step(
        &self,
        _: &NodeCtx<'_>,
        s: &mut State,
        round: usize,
        inbox: &Inbox<'_, Note>,
        out: &mut Outbox<'_, Note>,
        rng: &mut NodeRng,
    ) -> Status {
        if round % 2 == 1 {
            for (i, m) in inbox.iter() {
                if let Note::Propose(c) = m {
                    s.ports[i].proposal = Some(*c);
                }
            }
            let mut seen = vec![0u8; self.palette];
            for p in &s.ports {
                if let Some(c) = p.proposal {
                    seen[c as usize] = seen[c as usize].saturating_add(1);
                }
            }
            let snapshot: Bits = Arc::new(s.used.clone());
            for (i, p) in s.ports.iter_mut().enumerate() {
                if p.color.is_some() {
                    continue;
                }
                if let Some(c) = p.proposal {
                    let c = c as usize;
                    p.approve = seen[c] == 1 && !has(&s.used, c);
                    if !p.half {
                        out.send(i, Note::Approve(p.approve, snapshot.clone()));
                    }
                } else if !p.half {
                    out.send(i, Note::Used(snapshot.clone()));
                }
            }
            Status::Running
        } else {
            for (i, m) in inbox.iter() {
                let p = &mut s.ports[i];
                match m {
                    Note::Approve(ok, bits) => {
                        if p.approve && *ok {
                            let c = p.proposal.expect("approval without proposal");
                            p.color = Some(c);
                        }
                        p.theirs = Some(bits.clone());
                    }
                    Note::Used(bits) => p.theirs = Some(bits.clone()),
                    Note::Propose(_) => {}
                }
            }
            for p in s.ports.iter_mut() {
                if p.half && p.color.is_none() && p.approve {
                    p.color = p.proposal;
                }
                p.approve = false;
            }
            s.left = 0;
            for p in &s.ports {
                match p.color {
                    Some(c) => put(&mut s.used, c as usize),
                    None => s.left += 1,
                }
            }
            if s.left == 0 {
                return Status::Halted;
            }
            self.propose(s, out, rng);
            Status::Running
        }
    }
}

/// Proper coloring with `2D - 1` colors.
pub fn base_color(g: &Graph) -> Result<PaletteColoring> {
    Ok(base_color_with(g, (2 * g.max_degree()).saturating_sub(1), 0)?.0)
}

/// Proper coloring with colors in `0..palette`; needs `palette >= 2D - 1`.
pub fn base_color_with(g: &Graph, palette: usize, seed: u64) -> Result<(PaletteColoring, RunMetrics)> {
    let need = (2 * g.max_degree()).saturating_sub(1);
    if palette < need {
        return Err(param(format!("palette {palette} is below 2D - 1 = {need}")));
    }
    if g.m() == 0 {
        return Ok((PaletteColoring { palette_size: palette, colors: Vec::new() }, RunMetrics::default()));
    }
    let out = Engine::new(g).run(&Trials { palette }, seed, MAX_ROUNDS)?;
    let mut colors = vec![u32::MAX; g.m()];
    for v in 0..g.n() {
        for (p, ps) in g.ports(v).iter().zip(&out.states[v].ports) {
            colors[p.edge()] = ps.color.ok_or(Error::IncompleteArtifact { edge: p.edge() })?;
        }
    }
    let metrics = RunMetrics::phase("base-color", out.metrics.rounds, out.metrics.messages);
    Ok((PaletteColoring { palette_size: palette, colors }, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::first_conflict;
    use crate::graph::generate::{clique, generate, Family};

    #[test]
    fn matching_needs_one_color() {
        let g = Graph::new(6, [(0, Some(1)), (2, Some(3)), (4, Some(5))]).unwrap();
        let c = base_color(&g).unwrap();
        assert_eq!(c.palette_size, 1);
        assert!(c.colors.iter().all(|&x| x == 0));
    }

    #[test]
    fn triangle_and_path() {
        let c = base_color(&clique(3).unwrap()).unwrap();
        assert_eq!(c.palette_size, 3);
        assert_eq!(first_conflict(&clique(3).unwrap(), &c), None);
        let p = Graph::new(4, [(0, Some(1)), (1, Some(2)), (2, Some(3))]).unwrap();
        let c = base_color(&p).unwrap();
        assert!(c.palette_size <= 3);
        assert_eq!(first_conflict(&p, &c), None);
    }

    #[test]
    fn random_graphs_are_colored_properly() {
        for seed in 0..4 {
            let g = generate(&Family::Gnp { n: 80, p: 0.2 }, seed).unwrap();
            let (c, m) = base_color_with(&g, 2 * g.max_degree() - 1, seed).unwrap();
            assert_eq!(first_conflict(&g, &c), None);
            assert!(c.colors.iter().all(|&x| (x as usize) < c.palette_size));
            assert!(m.rounds > 0);
        }
    }

    #[test]
    fn half_edges_are_colored_too() {
        let g = Graph::new(3, [(0, Some(1)), (1, Some(2)), (1, None), (0, None)]).unwrap();
        let (c, _) = base_color_with(&g, 5, 1).unwrap();
        assert_eq!(first_conflict(&g, &c), None);
    }

    #[test]
    fn small_palettes_are_refused() {
        let g = clique(4).unwrap();
        assert!(base_color_with(&g, 4, 0).is_err());
    }
}
