//! Undirected degree splitting: two-colorings in which every node has about
//! half of its edges in each color.

pub mod paths;
pub mod search;
pub mod tokens;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use paths::{accept_per_terminal, augment, check_almost_disjoint, Arrival, AugmentingPath, PathSpace, Undirected};
pub use search::{enumerate_paths, greedy_paths, grow_tree, luby_paths, path_limit, FinderMode, TreeGrowth};
pub use tokens::{find_augmenting_paths, log15, quota, LevelStats, TokenParams, TokenSearch};

use crate::artifact::{Color, TwoColoring};
use crate::error::{param, Error, Result};
use crate::graph::virtualize::virtualize;
use crate::graph::Graph;
use crate::sim::RunMetrics;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypotheses {
    /// Reject parameters outside the range the guarantees are proved for.
    #[default]
    Enforce,
    /// Run anyway; the output is still checked.
    Relax,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialColoring {
    #[default]
    AllRed,
    Random(u64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Finder {
    #[default]
    Tokens,
    Greedy,
    Luby,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub hypotheses: Hypotheses,
    pub initial: InitialColoring,
    pub finder: Finder,
    /// Constant in the path length limit of the greedy and Luby finders.
    pub path_c: f64,
    /// Default `ceil(10 d ln n)`.
    pub iteration_cap: Option<usize>,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            hypotheses: Hypotheses::Enforce,
            initial: InitialColoring::AllRed,
            finder: Finder::Tokens,
            path_c: 3.0,
            iteration_cap: None,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn relaxed() -> SplitConfig {
        SplitConfig { hypotheses: Hypotheses::Relax, ..SplitConfig::default() }
    }
}

/// One round of find, accept and augment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Invocation {
    pub t: usize,
    pub sources: usize,
    pub returned: usize,
    pub accepted: usize,
    pub augmented: usize,
    pub levels: Vec<LevelStats>,
    /// The token search applied nothing and tree growth was used instead.
    pub fallback: bool,
}

#[derive(Clone, Debug)]
pub struct SplitOutcome {
    pub coloring: TwoColoring,
    pub metrics: RunMetrics,
    pub invocations: Vec<Invocation>,
}

fn initial_coloring(g: &Graph, init: InitialColoring) -> TwoColoring {
    match init {
        InitialColoring::AllRed => TwoColoring::uniform(g, Color::Red),
        InitialColoring::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let colors = (0..g.m()).map(|_| if rng.random_bool(0.5) { Color::Red } else { Color::Blue }).collect();
            TwoColoring::new(g, colors).expect("one color per edge")
        }
    }
}

pub(crate) fn default_cap(g: &Graph) -> usize {
    let d = g.max_degree().max(1) as f64;
    ((10.0 * d * (g.n().max(2) as f64).ln()).ceil() as usize).max(10)
}

/// Turns a `t`-balanced coloring into a `(t - 1)`-balanced one.
#[allow(clippy::too_many_arguments)]
pub fn improve_balance(
    g: &Graph,
    coloring: &mut TwoColoring,
    t: usize,
    eps: f64,
    cfg: &SplitConfig,
    metrics: &mut RunMetrics,
    log: &mut Vec<Invocation>,
) -> Result<()> {
    if t == 0 {
        return Err(param("threshold must be positive"));
    }
    if !coloring.is_balanced(t) {
        return Err(Error::Precondition(format!("coloring is not {t}-balanced")));
    }
    let d = g.max_degree();
    let cap = cfg.iteration_cap.unwrap_or_else(|| default_cap(g));
    let l = path_limit(g.n(), eps, cfg.path_c);
    let (mut find_rounds, mut find_msgs, mut aug_rounds) = (0usize, 0u64, 0usize);
    let mut iteration = 0;
    loop {
        let space = Undirected { graph: g, coloring, t };
        let sources = space.sources().len();
        if sources == 0 {
            break;
        }
        if iteration == cap {
            return Err(Error::IterationCap { cap, residual: sources });
        }
        let mut inv = Invocation { t, sources, ..Invocation::default() };
        let found = match cfg.finder {
            Finder::Tokens => {
                let r = find_augmenting_paths(&space, &TokenParams::new(g.m(), t, d, eps)?);
                find_rounds += r.rounds;
                inv.levels = r.levels;
                r.paths
            }
            Finder::Greedy => {
                let (p, m) = greedy_paths(&space, l);
                find_rounds += m.rounds;
                p
            }
            Finder::Luby => {
                let (p, m) = luby_paths(&space, l, cfg.seed ^ ((t as u64) << 32) ^ iteration as u64)?;
                find_rounds += m.rounds;
                find_msgs += m.messages;
                p
            }
        };
        inv.returned = found.len();
        let (accepted, augmented) = apply(g, coloring, t, &found);
        inv.accepted = accepted;
        inv.augmented = augmented;
        aug_rounds += 2 * found.iter().map(|p| p.len()).max().unwrap_or(0);
        if inv.augmented == 0 && cfg.finder == Finder::Tokens && cfg.hypotheses == Hypotheses::Relax {
            let space = Undirected { graph: g, coloring, t };
            let (found, m) = greedy_paths(&space, l);
            find_rounds += m.rounds;
            inv.fallback = true;
            inv.returned = found.len();
            let (accepted, augmented) = apply(g, coloring, t, &found);
            inv.accepted = accepted;
            inv.augmented = augmented;
            aug_rounds += 2 * found.iter().map(|p| p.len()).max().unwrap_or(0);
        }
        let stalled = inv.augmented == 0;
        log.push(inv);
        if stalled {
            return Err(Error::Stalled { t, residual: sources });
        }
        iteration += 1;
    }
    metrics.then("find-paths", find_rounds, find_msgs);
    metrics.then("augment", aug_rounds, 0);
    Ok(())
}

/// Accepts one path per terminal and applies those still valid.
fn apply(g: &Graph, coloring: &mut TwoColoring, t: usize, found: &[AugmentingPath]) -> (usize, usize) {
    let accepted: Vec<AugmentingPath> = accept_per_terminal(found).into_iter().cloned().collect();
    let augmented = accepted.iter().filter(|p| augment(g, coloring, t, p).is_ok()).count();
    (accepted.len(), augmented)
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

fn verify(c: &TwoColoring, bound: usize) -> Result<()> {
    if c.is_balanced(bound) {
        Ok(())
    } else {
        Err(Error::Invariant(format!("color degree {} exceeds {bound}", c.max_color_degree())))
    }
}

/// `floor((1 + eps) d / 2)`-balanced coloring by lowering the threshold one
/// step at a time from the maximum degree `d`.
pub fn balanced_split_low(g: &Graph, eps: f64, cfg: &SplitConfig) -> Result<SplitOutcome> {
    check_eps(eps)?;
    let d = g.max_degree();
    let mut outcome = SplitOutcome {
        coloring: initial_coloring(g, cfg.initial),
        metrics: RunMetrics::default(),
        invocations: Vec::new(),
    };
    if g.m() == 0 {
        return Ok(outcome);
    }
    let lg = log15(g.m());
    if cfg.hypotheses == Hypotheses::Enforce && eps <= 4.0 * lg / d as f64 {
        return Err(param(format!(
            "epsilon {eps} is at most 4 log_1.5(m) / d = {:.3}; use the randomized split",
            4.0 * lg / d as f64
        )));
    }
    let target = ((1.0 + eps) * d as f64 / 2.0).floor() as usize;
    lower(g, eps, cfg, target, &mut outcome)?;
    Ok(outcome)
}

fn lower(g: &Graph, eps: f64, cfg: &SplitConfig, target: usize, outcome: &mut SplitOutcome) -> Result<()> {
    let start = outcome.coloring.max_color_degree().max(target);
    for t in (target + 1..=start).rev() {
        improve_balance(g, &mut outcome.coloring, t, eps, cfg, &mut outcome.metrics, &mut outcome.invocations)?;
    }
    verify(&outcome.coloring, target)
}

/// `floor((1 + eps) D / 2)`-balanced coloring for large maximum degree `D`:
/// nodes are split into virtual nodes of degree `ceil(8 log_1.5(m) / eps)`
/// and the virtual graph is split with half the slack.
pub fn balanced_split_high(g: &Graph, eps: f64, cfg: &SplitConfig) -> Result<SplitOutcome> {
    check_eps(eps)?;
    let delta = g.max_degree();
    if g.m() == 0 {
        return balanced_split_low(g, eps, cfg);
    }
    let lg = log15(g.m());
    let need = (32.0 * lg / (eps * eps)).ceil() as usize;
    if cfg.hypotheses == Hypotheses::Enforce && delta < need {
        return Err(param(format!("maximum degree {delta} is below {need}; use the randomized split")));
    }
    let half = eps / 2.0;
    let d = (4.0 * lg / half).ceil() as usize;
    let bound = ((1.0 + eps) * delta as f64 / 2.0).floor() as usize;
    if delta <= d {
        let mut out = balanced_split_low(g, eps, cfg)?;
        out.metrics.max_bad_component = None;
        verify(&out.coloring, bound)?;
        return Ok(out);
    }
    let (vg, _map) = virtualize(g, d)?;
    let inner = SplitConfig { hypotheses: Hypotheses::Relax, ..cfg.clone() };
    let out = balanced_split_low(&vg, half, &inner)?;
    // virtual edges keep their ids
    let coloring = TwoColoring::new(g, out.coloring.colors().to_vec())?;
    verify(&coloring, bound)?;
    let mut metrics = RunMetrics::phase("virtualize", 1, 0);
    metrics.append(out.metrics);
    Ok(SplitOutcome { coloring, metrics, invocations: out.invocations })
}

/// `ceil((1 + eps) D / 2)`-balanced coloring with short randomized path
/// sets; no lower bound on `eps D`.
pub fn balanced_split_randomized(g: &Graph, eps: f64, seed: u64, mode: FinderMode) -> Result<SplitOutcome> {
    check_eps(eps)?;
    let cfg = SplitConfig {
        hypotheses: Hypotheses::Relax,
        finder: match mode {
            FinderMode::Greedy => Finder::Greedy,
            FinderMode::Luby => Finder::Luby,
        },
        seed,
        ..SplitConfig::default()
    };
    let delta = g.max_degree();
    let mut outcome = SplitOutcome {
        coloring: initial_coloring(g, cfg.initial),
        metrics: RunMetrics::default(),
        invocations: Vec::new(),
    };
    let target = ((1.0 + eps) * delta as f64 / 2.0).ceil() as usize;
    lower(g, eps, &cfg, target, &mut outcome)?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{clique, cycle, generate, Family};

    #[test]
    fn empty_graph_gives_empty_coloring() {
        let g = Graph::new(5, std::iter::empty()).unwrap();
        let out = balanced_split_low(&g, 0.5, &SplitConfig::default()).unwrap();
        assert!(out.coloring.is_empty());
    }

    #[test]
    fn small_epsilon_is_refused() {
        let g = generate(&Family::Regular { n: 100, delta: 8 }, 0).unwrap();
        assert!(matches!(balanced_split_low(&g, 0.5, &SplitConfig::default()), Err(Error::Parameter(_))));
        assert!(matches!(balanced_split_low(&g, 1.5, &SplitConfig::relaxed()), Err(Error::Parameter(_))));
    }

    #[test]
    fn balanced_input_needs_no_invocations() {
        let g = generate(&Family::Regular { n: 50, delta: 6 }, 1).unwrap();
        let mut c = TwoColoring::uniform(&g, Color::Red);
        let mut m = RunMetrics::default();
        let mut log = Vec::new();
        improve_balance(&g, &mut c, 7, 0.5, &SplitConfig::default(), &mut m, &mut log).unwrap();
        assert!(log.is_empty());
        assert_eq!(c, TwoColoring::uniform(&g, Color::Red));
    }

    #[test]
    fn each_invocation_makes_progress() {
        let g = generate(&Family::Regular { n: 200, delta: 16 }, 2).unwrap();
        let mut c = TwoColoring::uniform(&g, Color::Red);
        let mut m = RunMetrics::default();
        let mut log = Vec::new();
        let cfg = SplitConfig::relaxed();
        for t in (10..=16).rev() {
            improve_balance(&g, &mut c, t, 0.5, &cfg, &mut m, &mut log).unwrap();
            assert!(c.is_balanced(t - 1));
            assert!(c.counts_consistent(&g));
        }
        for w in log.windows(2) {
            if w[0].t == w[1].t {
                assert!(w[1].sources + w[0].augmented <= w[0].sources);
            }
        }
        for inv in &log {
            assert!(inv.augmented >= 1);
            assert!(inv.accepted * 16 >= inv.returned);
        }
    }

    #[test]
    fn relaxed_low_split_reaches_the_target() {
        for seed in 0..3 {
            let g = generate(&Family::Regular { n: 150, delta: 20 }, seed).unwrap();
            let out = balanced_split_low(&g, 0.3, &SplitConfig::relaxed()).unwrap();
            assert!(out.coloring.is_balanced(13));
            let dc = g.bipartite_double_cover();
            let out = balanced_split_low(&dc, 0.3, &SplitConfig::relaxed()).unwrap();
            assert!(out.coloring.is_balanced(13));
        }
    }

    #[test]
    fn all_finders_agree_on_the_bound() {
        let g = generate(&Family::Regular { n: 40, delta: 8 }, 5).unwrap();
        for finder in [Finder::Tokens, Finder::Greedy, Finder::Luby] {
            let cfg = SplitConfig { finder, ..SplitConfig::relaxed() };
            let out = balanced_split_low(&g, 0.5, &cfg).unwrap();
            assert!(out.coloring.is_balanced(6), "{finder:?}");
        }
    }

    #[test]
    fn high_split_without_virtualization_is_the_low_split() {
        let g = generate(&Family::Regular { n: 100, delta: 24 }, 0).unwrap();
        let a = balanced_split_high(&g, 0.5, &SplitConfig::relaxed()).unwrap();
        let b = balanced_split_low(&g, 0.5, &SplitConfig::relaxed()).unwrap();
        assert_eq!(a.coloring, b.coloring);
    }

    #[test]
    fn high_split_virtualizes_large_degrees() {
        // complete bipartite 3 x 300: few edges, large maximum degree
        let ends: Vec<(usize, Option<usize>)> =
            (0..3).flat_map(|a| (3..303).map(move |b| (a, Some(b)))).collect();
        let g = Graph::new(303, ends).unwrap();
        let eps = 0.95;
        let d = (8.0 * log15(g.m()) / eps).ceil() as usize;
        assert!(d < 300);
        let out = balanced_split_high(&g, eps, &SplitConfig::relaxed()).unwrap();
        assert!(out.coloring.is_balanced(((1.0 + eps) * 300.0 / 2.0).floor() as usize));
        assert_eq!(out.metrics.phases[0].phase, "virtualize");
    }

    #[test]
    fn randomized_split_on_small_cases() {
        let g = cycle(7).unwrap();
        let out = balanced_split_randomized(&g, 0.5, 0, FinderMode::Greedy).unwrap();
        assert!(out.coloring.is_balanced(2));
        let g = clique(3).unwrap();
        for eps in [0.1, 0.5, 0.9] {
            let out = balanced_split_randomized(&g, eps, 0, FinderMode::Greedy).unwrap();
            assert!(out.coloring.is_balanced(2));
        }
        let g = generate(&Family::Regular { n: 500, delta: 8 }, 3).unwrap();
        let out = balanced_split_randomized(&g, 0.25, 3, FinderMode::Greedy).unwrap();
        assert!(out.coloring.is_balanced(5));
    }
}
