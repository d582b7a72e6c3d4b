//! Algorithm dispatch: one entry per `--algo` value, each paired with the
//! contract its output is checked against.

use clap::ValueEnum;
use degsplit::color::{
    base_color_with, coarse_bound, coarse_color, fine_color, randomized_color, FineConfig, RandomizedColorConfig,
};
use degsplit::oracle::{check, euler_split, Artifact, Check, Contract, ValidationReport};
use degsplit::orient::{
    arboricity_orient, directed_split_deterministic, directed_split_randomized, forest_decompose, FlowConfig, FlowMode,
    ForestConfig,
};
use degsplit::sim::RunMetrics;
use degsplit::sinkless::{deterministic_sinkless, sinkless_by_gathering, sinkless_dispatch_with, SinklessConfig};
use degsplit::split::{
    balanced_split_high, balanced_split_low, balanced_split_randomized, FinderMode, Hypotheses, SplitConfig,
};
use degsplit::{ForestDecomposition, Graph, Orientation, PaletteColoring, TwoColoring};
use serde_json::Value;

use crate::Usage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Algo {
    Sinkless,
    DeterministicSinkless,
    BalancedSplitLow,
    BalancedSplitHigh,
    BalancedSplitRandomized,
    DirectedSplit,
    DirectedSplitRandomized,
    BaseColor,
    FineColor,
    CoarseColor,
    RandomizedColor,
    ArboricityOrient,
    ForestDecompose,
    EulerSplit,
}

impl Algo {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped values").get_name().to_string()
    }

    fn needs_eps(self) -> bool {
        !matches!(
            self,
            Algo::Sinkless | Algo::DeterministicSinkless | Algo::BaseColor | Algo::CoarseColor | Algo::EulerSplit
        )
    }

    pub fn uses_arboricity(self) -> bool {
        matches!(self, Algo::ArboricityOrient | Algo::ForestDecompose)
    }
}

/// Everything an algorithm may read besides the graph and the seed.
#[derive(Clone, Debug)]
pub struct Params {
    pub algo: Algo,
    pub eps: Option<f64>,
    pub x: Option<usize>,
    pub a: Option<usize>,
    pub mode: Option<String>,
    pub max_rounds: Option<usize>,
    pub relax: bool,
    pub mark_probability: f64,
    pub high_degree_threshold: usize,
    pub fast_path_c1: f64,
    pub fine_threshold: Option<usize>,
    pub path_c: f64,
    pub c_l: f64,
    pub c2: f64,
    pub forest_attempts: usize,
    pub min_delta: usize,
}

impl Params {
    /// Parameter checks that need no graph.
    pub fn validate(&self) -> Result<(), Usage> {
        let algo = self.algo.name();
        match self.eps {
            None if self.algo.needs_eps() => return Err(Usage(format!("{algo} needs --eps"))),
            Some(e) if !(e > 0.0 && e < 1.0) => return Err(Usage(format!("--eps must lie in (0, 1), got {e}"))),
            _ => {}
        }
        match (self.algo, self.x) {
            (Algo::CoarseColor, None) => return Err(Usage("coarse_color needs --x".into())),
            (Algo::CoarseColor, Some(x)) if x < 2 => return Err(Usage(format!("--x must be at least 2, got {x}"))),
            _ => {}
        }
        if self.algo.uses_arboricity() && self.a.is_none() {
            return Err(Usage(format!("{algo} needs --a")));
        }
        if self.mode.is_some() && !matches!(self.algo, Algo::BalancedSplitRandomized | Algo::ArboricityOrient) {
            return Err(Usage(format!("{algo} takes no --mode")));
        }
        if !(0.0..=1.0).contains(&self.mark_probability) {
            return Err(Usage(format!("--mark-probability must lie in [0, 1], got {}", self.mark_probability)));
        }
        self.finder_mode()?;
        self.flow_mode()?;
        Ok(())
    }

    fn finder_mode(&self) -> Result<FinderMode, Usage> {
        match (self.algo, self.mode.as_deref()) {
            (Algo::BalancedSplitRandomized, Some("luby")) => Ok(FinderMode::Luby),
            (Algo::BalancedSplitRandomized, Some(m)) if m != "greedy" => {
                Err(Usage(format!("unknown mode {m}; expected greedy or luby")))
            }
            _ => Ok(FinderMode::Greedy),
        }
    }

    fn flow_mode(&self) -> Result<FlowMode, Usage> {
        match (self.algo, self.mode.as_deref()) {
            (Algo::ArboricityOrient, Some("luby_rounds" | "luby")) => Ok(FlowMode::LubyRounds),
            (Algo::ArboricityOrient, Some(m)) if !matches!(m, "blocking_greedy" | "greedy") => {
                Err(Usage(format!("unknown mode {m}; expected blocking_greedy or luby_rounds")))
            }
            _ => Ok(FlowMode::BlockingGreedy),
        }
    }

    fn eps(&self) -> f64 {
        self.eps.expect("validated")
    }

    fn split(&self, seed: u64) -> SplitConfig {
        let base = if self.relax { SplitConfig::relaxed() } else { SplitConfig::default() };
        SplitConfig { path_c: self.path_c, seed, ..base }
    }

    fn flow(&self, seed: u64) -> Result<FlowConfig, Usage> {
        Ok(FlowConfig { mode: self.flow_mode()?, c_l: self.c_l, seed })
    }

    fn fine(&self, seed: u64) -> FineConfig {
        FineConfig { threshold: self.fine_threshold, split: self.split(seed), seed }
    }
}

pub enum Output {
    Orientation(Orientation),
    TwoColoring(TwoColoring),
    Palette(PaletteColoring),
    Forests(ForestDecomposition),
}

impl Output {
    pub fn to_json(&self, g: &Graph) -> Value {
        let s = match self {
            Output::Orientation(o) => o.to_json_string(g),
            Output::TwoColoring(c) => c.to_json_string(),
            Output::Palette(c) => c.to_json_string(),
            Output::Forests(f) => f.to_json_string(),
        };
        serde_json::from_str(&s).expect("artifact JSON round-trips")
    }

    fn artifact(&self) -> Artifact<'_> {
        match self {
            Output::Orientation(o) => Artifact::Orientation(o),
            Output::TwoColoring(c) => Artifact::TwoColoring(c),
            Output::Palette(c) => Artifact::Palette(c),
            Output::Forests(f) => Artifact::Forests(f),
        }
    }
}

pub struct Outcome {
    pub output: Output,
    pub metrics: RunMetrics,
    pub contract: Contract,
    pub report: ValidationReport,
}

fn floor_half(eps: f64, delta: usize) -> usize {
    ((1.0 + eps) * delta as f64 / 2.0).floor() as usize
}

fn ceil_half(eps: f64, delta: usize) -> usize {
    ((1.0 + eps) * delta as f64 / 2.0).ceil() as usize
}

/// Adds a check that the checker itself does not know about.
fn extra(report: &mut ValidationReport, name: &str, pass: bool) {
    report.checks.push(Check { name: name.to_string(), pass, witness: None });
    report.pass = report.checks.iter().all(|c| c.pass);
}

pub fn execute(g: &Graph, p: &Params, seed: u64) -> anyhow::Result<Outcome> {
    let delta = g.max_degree();
    let (output, metrics, contract, limit): (Output, RunMetrics, Contract, Option<(&str, bool)>) = match p.algo {
        Algo::Sinkless => {
            let cfg = SinklessConfig {
                fast_path_c1: p.fast_path_c1,
                high_degree_threshold: p.high_degree_threshold,
                mark_probability: p.mark_probability,
                ..SinklessConfig::default()
            };
            // the dispatcher needs minimum degree three
            let (o, m) = if g.min_degree() < 3 { sinkless_by_gathering(g)? } else { sinkless_dispatch_with(g, seed, &cfg)? };
            (Output::Orientation(o), m, Contract::Sinkless, None)
        }
        Algo::DeterministicSinkless => {
            let (o, m) = deterministic_sinkless(g, g.min_degree())?;
            (Output::Orientation(o), m, Contract::Sinkless, None)
        }
        Algo::BalancedSplitLow | Algo::BalancedSplitHigh => {
            let eps = p.eps();
            let run = if p.algo == Algo::BalancedSplitLow { balanced_split_low } else { balanced_split_high };
            let out = run(g, eps, &p.split(seed))?;
            (Output::TwoColoring(out.coloring), out.metrics, Contract::Balance { t: floor_half(eps, delta) }, None)
        }
        Algo::BalancedSplitRandomized => {
            let eps = p.eps();
            let out = balanced_split_randomized(g, eps, seed, p.finder_mode()?)?;
            (Output::TwoColoring(out.coloring), out.metrics, Contract::Balance { t: ceil_half(eps, delta) }, None)
        }
        Algo::DirectedSplit => {
            let eps = p.eps();
            let out = directed_split_deterministic(g, eps, &p.split(seed))?;
            let d = floor_half(eps, delta);
            (Output::Orientation(out.orientation), out.metrics, Contract::InOutBounds { din: d, dout: d }, None)
        }
        Algo::DirectedSplitRandomized => {
            let eps = p.eps();
            let (o, m) = directed_split_randomized(g, eps, &p.flow(seed)?)?;
            let d = ceil_half(eps, delta);
            (Output::Orientation(o), m, Contract::InOutBounds { din: d, dout: d }, None)
        }
        Algo::BaseColor => {
            let palette = (2 * delta).saturating_sub(1);
            let (c, m) = base_color_with(g, palette, seed)?;
            (Output::Palette(c), m, Contract::Proper, None)
        }
        Algo::FineColor => {
            let eps = p.eps();
            let (c, m) = fine_color(g, eps, &p.fine(seed))?;
            let ok = c.palette_size as f64 <= (2.0 + eps) * delta as f64;
            (Output::Palette(c), m, Contract::Proper, Some(("palette_bound", ok)))
        }
        Algo::CoarseColor => {
            let x = p.x.expect("validated");
            let (c, m) = coarse_color(g, x, seed)?;
            let ok = c.palette_size as f64 <= coarse_bound(delta, x);
            (Output::Palette(c), m, Contract::Proper, Some(("palette_bound", ok)))
        }
        Algo::RandomizedColor => {
            let eps = p.eps();
            let cfg = RandomizedColorConfig { min_delta: p.min_delta, fine: p.fine(seed), ..RandomizedColorConfig::default() };
            let (c, m, _) = randomized_color(g, eps, seed, &cfg)?;
            let ok = c.palette_size as f64 <= (4.0 + eps) * delta as f64;
            (Output::Palette(c), m, Contract::Proper, Some(("palette_bound", ok)))
        }
        Algo::ArboricityOrient => {
            let (a, eps) = (p.a.expect("validated"), p.eps());
            let out = arboricity_orient(g, a, eps, &p.flow(seed)?)?;
            (Output::Orientation(out.orientation), out.metrics, Contract::InOutBounds { din: delta, dout: out.bound }, None)
        }
        Algo::ForestDecompose => {
            let (a, eps) = (p.a.expect("validated"), p.eps());
            let oriented = arboricity_orient(g, a, eps, &p.flow(seed)?)?;
            let cfg = ForestConfig {
                hypotheses: if p.relax { Hypotheses::Relax } else { Hypotheses::Enforce },
                c2: p.c2,
                attempts: p.forest_attempts,
            };
            let (f, m, _) = forest_decompose(g, &oriented.orientation, a, eps, seed, &cfg)?;
            let mut metrics = oriented.metrics;
            metrics.append(m);
            let ok = f.forests as f64 <= a as f64 * (1.0 + 8.0 * eps);
            (Output::Forests(f), metrics, Contract::Forests { stars: true }, Some(("forest_count", ok)))
        }
        Algo::EulerSplit => {
            let c = euler_split(g);
            (Output::TwoColoring(c), RunMetrics::default(), Contract::Balance { t: delta / 2 + 1 }, None)
        }
    };
    if let Some(r) = p.max_rounds {
        if metrics.rounds > r {
            anyhow::bail!("{} used {} rounds, above --max-rounds {r}", p.algo.name(), metrics.rounds);
        }
    }
    let mut report = check(g, output.artifact(), contract)?;
    if let Some((name, ok)) = limit {
        extra(&mut report, name, ok);
    }
    Ok(Outcome { output, metrics, contract, report })
}

/// Reads an artifact of the kind `contract` applies to.
pub fn parse_artifact(g: &Graph, contract: Contract, json: &str) -> degsplit::Result<Output> {
    Ok(match contract {
        Contract::Sinkless | Contract::InOutBounds { .. } => Output::Orientation(Orientation::from_json_str(g, json)?),
        Contract::Balance { .. } => Output::TwoColoring(TwoColoring::from_json_str(g, json)?),
        Contract::Proper => Output::Palette(PaletteColoring::from_json_str(g, json)?),
        Contract::Forests { .. } => Output::Forests(ForestDecomposition::from_json_str(g, json)?),
    })
}

pub fn verify(g: &Graph, output: &Output, contract: Contract) -> degsplit::Result<ValidationReport> {
    check(g, output.artifact(), contract)
}
