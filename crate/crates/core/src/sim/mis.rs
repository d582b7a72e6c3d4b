//! Luby's randomized maximal independent set.

use rand::Rng;

use super::{Engine, Inbox, NodeCtx, NodeProgram, NodeRng, Outbox, RunMetrics, Status};
use crate::error::Result;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Undecided,
    In,
    Out,
}

#[derive(Clone, Copy, Debug)]
enum Msg {
    Priority(u64, u64),
    Joined,
}

struct Luby;

#[derive(Debug)]
struct State {
    mine: (u64, u64),
    role: Membership,
}

impl NodeProgram for Luby {
    type State = State;
    type Msg = Msg;

    fn init(&self, ctx: &NodeCtx<'_>, out: &mut Outbox<'_, Msg>, rng: &mut NodeRng) -> (State, Status) {
        let mine = (rng.random(), ctx.label);
        out.broadcast(Msg::Priority(mine.0, mine.1));
        (State { mine, role: Membership::Undecided }, Status::Running)
    }

    fn step(
        &self,
        _: &NodeCtx<'_>,
        s: &mut State,
        round: usize,
        inbox: &Inbox<'_, Msg>,
        out: &mut Outbox<'_, Msg>,
        rng: &mut NodeRng,
    ) -> Status {
        if round % 2 == 1 {
            // undecided neighbors are exactly those that sent a priority
            let beaten = inbox.iter().any(|(_, m)| matches!(*m, Msg::Priority(p, l) if (p, l) < s.mine));
            if !beaten {
                s.role = Membership::In;
                out.broadcast(Msg::Joined);
                return Status::Halted;
            }
            Status::Running
        } else {
            if inbox.iter().any(|(_, m)| matches!(m, Msg::Joined)) {
                s.role = Membership::Out;
                return Status::Halted;
            }
            s.mine.0 = rng.random();
            out.broadcast(Msg::Priority(s.mine.0, s.mine.1));
            Status::Running
        }
    }
}

/// Membership per node (`true` = in the set) and the run's metrics.
pub fn luby_mis(g: &Graph, seed: u64, max_rounds: usize) -> Result<(Vec<bool>, RunMetrics)> {
    luby_mis_on(&Engine::new(g), seed, max_rounds)
}

pub fn luby_mis_on(engine: &Engine<'_>, seed: u64, max_rounds: usize) -> Result<(Vec<bool>, RunMetrics)> {
    let out = engine.run(&Luby, seed, max_rounds)?;
    let members = out.states.iter().map(|s| s.role == Membership::In).collect();
    Ok((members, out.metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{generate, Family};

    fn check_mis(g: &Graph, inside: &[bool]) {
        for (_, a, b) in g.edges() {
            if let Some(b) = b {
                assert!(!(inside[a] && inside[b]), "adjacent members {a} {b}");
            }
        }
        for v in 0..g.n() {
            if !inside[v] {
                assert!(g.ports(v).iter().any(|p| p.other().is_some_and(|w| inside[w])), "{v} could join");
            }
        }
    }

    #[test]
    fn independent_and_maximal() {
        for seed in 0..5 {
            let g = generate(&Family::Gnp { n: 120, p: 0.05 }, seed).unwrap();
            let (inside, m) = luby_mis(&g, seed, 1000).unwrap();
            check_mis(&g, &inside);
            assert!(m.rounds < 60);
        }
    }

    #[test]
    fn parallel_edges_and_isolated_nodes() {
        let g = Graph::new(4, [(0, Some(1)), (0, Some(1)), (2, None)]).unwrap();
        let (inside, m) = luby_mis(&g, 3, 100).unwrap();
        check_mis(&g, &inside);
        assert!(inside[2] && inside[3]);
        assert_eq!(m.rounds, 2);
    }
}
