mod algo;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use degsplit::oracle::{Contract, ValidationReport};
use degsplit::{generate, Error, Family, Graph};
use serde_json::{json, Value};

use algo::{Algo, Params};

/// Bad flags or flag combinations; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser)]
#[command(name = "degsplit", version, about = "Degree splitting, sinkless orientation and edge coloring on a simulated network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded graph as JSON.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run one algorithm and write {artifact, metrics, report}.
    Run {
        #[command(flatten)]
        family: FamilyArgs,
        /// Read the graph from a file instead of generating it.
        #[arg(long, conflicts_with = "family")]
        graph: Option<PathBuf>,
        #[command(flatten)]
        algo: AlgoArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-phase log as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Check an artifact against a contract.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        /// A bare artifact or the output of `run`.
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        contract: ContractKind,
        /// Per-color degree limit for `balance`.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        din: Option<usize>,
        #[arg(long)]
        dout: Option<usize>,
        /// Require the star-flagged forests to be star forests.
        #[arg(long)]
        stars: bool,
    },
    /// Run an algorithm over a seed range and write one JSON line per run.
    Bench {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        algo: AlgoArgs,
        /// Inclusive range `a..b` or a comma list.
        #[arg(long, default_value = "0")]
        seeds: String,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum FamilyKind {
    Cycle,
    Clique,
    Regular,
    Gnp,
    ForestUnion,
    Tree,
}

#[derive(Args, Clone, Debug)]
struct FamilyArgs {
    #[arg(long)]
    family: Option<FamilyKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    /// Forest count of `forest_union`, also the arboricity bound of the orientation algorithms.
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
}

impl FamilyArgs {
    fn family(&self) -> Result<Family, Usage> {
        let kind = self.family.ok_or_else(|| Usage("--family is required".into()))?;
        let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Usage(format!("this family needs --{flag}")));
        let n = need(self.n, "n")?;
        Ok(match kind {
            FamilyKind::Cycle => Family::Cycle { n },
            FamilyKind::Clique => Family::Clique { n },
            FamilyKind::Regular => Family::Regular { n, delta: need(self.delta, "delta")? },
            FamilyKind::Gnp => Family::Gnp { n, p: self.p.ok_or_else(|| Usage("gnp needs --p".into()))? },
            FamilyKind::ForestUnion => Family::ForestUnion { n, a: need(self.a, "a")? },
            FamilyKind::Tree => Family::Tree { n },
        })
    }
}

#[derive(Args, Clone, Debug)]
struct AlgoArgs {
    #[arg(long)]
    algo: Algo,
    #[arg(long)]
    eps: Option<f64>,
    /// Virtual degree of the coarse coloring.
    #[arg(long)]
    x: Option<usize>,
    /// `greedy` or `luby` for the randomized split; `blocking_greedy` or `luby_rounds` for the orientation.
    #[arg(long)]
    mode: Option<String>,
    /// Fail when an algorithm reports more rounds.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Run outside the parameter ranges the guarantees need; outputs are still checked.
    #[arg(long)]
    relax: bool,
    #[arg(long, default_value_t = 0.25)]
    mark_probability: f64,
    #[arg(long, default_value_t = 500)]
    high_degree_threshold: usize,
    #[arg(long, default_value_t = 4.0)]
    fast_path_c1: f64,
    /// Degree at which the fine coloring stops splitting; computed from m and eps by default.
    #[arg(long)]
    fine_threshold: Option<usize>,
    /// Constant of the split path length limit.
    #[arg(long, default_value_t = 3.0)]
    path_c: f64,
    /// Constant of the orientation iteration cap.
    #[arg(long, default_value_t = 3.0)]
    c_l: f64,
    /// Constant of the forest decomposition's arboricity requirement.
    #[arg(long, default_value_t = 1.0)]
    c2: f64,
    #[arg(long, default_value_t = 10)]
    forest_attempts: usize,
    /// Smallest maximum degree the randomized coloring accepts.
    #[arg(long, default_value_t = 64)]
    min_delta: usize,
}

impl AlgoArgs {
    fn params(&self, a: Option<usize>) -> Params {
        Params {
            algo: self.algo,
            eps: self.eps,
            x: self.x,
            a,
            mode: self.mode.clone(),
            max_rounds: self.max_rounds,
            relax: self.relax,
            mark_probability: self.mark_probability,
            high_degree_threshold: self.high_degree_threshold,
            fast_path_c1: self.fast_path_c1,
            fine_threshold: self.fine_threshold,
            path_c: self.path_c,
            c_l: self.c_l,
            c2: self.c2,
            forest_attempts: self.forest_attempts,
            min_delta: self.min_delta,
        }
    }
}

#[derive(Args, Clone, Debug)]
struct OutArgs {
    /// Output file; relative paths land in the output directory when one is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "DEGSPLIT_OUT_DIR", hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

impl OutArgs {
    /// `None` means stdout.
    fn target(&self, default_name: &str) -> Option<PathBuf> {
        match (&self.out, &self.out_dir) {
            (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(dir.join(default_name)),
            (None, None) => None,
        }
    }

    fn write(&self, default_name: &str, text: &str) -> anyhow::Result<()> {
        match self.target(default_name) {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
                }
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ContractKind {
    Sinkless,
    InOut,
    Balance,
    Proper,
    Forests,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Usage> {
    let bad = || Usage(format!("cannot read seeds {s:?}; use a..b or a,b,c"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Graph::from_json_str(&text)?)
}

fn failure(report: &ValidationReport) -> Option<String> {
    report.first_failure().map(|c| match &c.witness {
        Some(w) => format!("check {} failed, witness {}", c.name, serde_json::to_string(w).unwrap_or_default()),
        None => format!("check {} failed", c.name),
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialization cannot fail");
    s.push('\n');
    s
}

/// Arboricity used by the orientation algorithms: `--a`, which also sets the
/// forest count of `forest_union`.
fn arboricity(family: &FamilyArgs) -> Option<usize> {
    family.a
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate { family, seed, out } => {
            let fam = family.family()?;
            let g = generate(&fam, seed)?;
            out.write(&format!("graph-{seed}.json"), &(g.to_json_string() + "\n"))?;
            Ok(true)
        }
        Command::Run { family, graph, algo, seed, log, out } => {
            let params = algo.params(arboricity(&family));
            params.validate()?;
            let (g, source) = match &graph {
                Some(path) => (read_graph(path)?, json!({ "file": path.display().to_string() })),
                None => {
                    let fam = family.family()?;
                    (generate(&fam, seed)?, serde_json::to_value(&fam)?)
                }
            };
            let outcome = algo::execute(&g, &params, seed)?;
            let doc = json!({
                "algorithm": params.algo.name(),
                "seed": seed,
                "graph": { "source": source, "n": g.n(), "m": g.m(), "max_degree": g.max_degree() },
                "parameters": { "eps": params.eps, "x": params.x, "a": params.a, "mode": params.mode },
                "contract": outcome.contract,
                "artifact": outcome.output.to_json(&g),
                "metrics": outcome.metrics,
                "report": outcome.report,
            });
            out.write(&format!("{}-{seed}.json", params.algo.name()), &pretty(&doc))?;
            if let Some(path) = log {
                fs::write(&path, outcome.metrics.log_lines()).with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(msg) = failure(&outcome.report) {
                eprintln!("verification failed: {msg}");
                return Ok(false);
            }
            Ok(true)
        }
        Command::Verify { graph, artifact, contract, t, din, dout, stars } => {
            let g = read_graph(&graph)?;
            let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Usage(format!("this contract needs --{flag}")));
            let contract = match contract {
                ContractKind::Sinkless => Contract::Sinkless,
                ContractKind::InOut => Contract::InOutBounds { din: need(din, "din")?, dout: need(dout, "dout")? },
                ContractKind::Balance => Contract::Balance { t: need(t, "t")? },
                ContractKind::Proper => Contract::Proper,
                ContractKind::Forests => Contract::Forests { stars },
            };
            let text = fs::read_to_string(&artifact).with_context(|| format!("reading {}", artifact.display()))?;
            let value: Value = serde_json::from_str(&text)?;
            let inner = match value.get("artifact") {
                Some(a) if value.get("report").is_some() => serde_json::to_string(a)?,
                _ => text,
            };
            let output = algo::parse_artifact(&g, contract, &inner)?;
            let report = algo::verify(&g, &output, contract)?;
            println!("{}", serde_json::to_string(&report)?);
            if let Some(msg) = failure(&report) {
                eprintln!("verification failed: {msg}");
                return Ok(false);
            }
            Ok(true)
        }
        Command::Bench { family, algo, seeds, out } => {
            let params = algo.params(arboricity(&family));
            params.validate()?;
            let fam = family.family()?;
            let seeds = parse_seeds(&seeds)?;
            let mut lines = String::new();
            let mut all = true;
            for seed in seeds {
                let g = generate(&fam, seed)?;
                let mut row = json!({
                    "algorithm": params.algo.name(),
                    "seed": seed,
                    "n": g.n(),
                    "eps": params.eps,
                });
                if params.algo.uses_arboricity() {
                    row["a"] = json!(params.a);
                } else {
                    row["delta"] = json!(g.max_degree());
                }
                match algo::execute(&g, &params, seed) {
                    Ok(o) => {
                        row["rounds"] = json!(o.metrics.rounds);
                        row["pass"] = json!(o.report.pass);
                        all &= o.report.pass;
                    }
                    Err(e) => {
                        row["rounds"] = Value::Null;
                        row["pass"] = json!(false);
                        row["error"] = json!(e.to_string());
                        all = false;
                    }
                }
                lines.push_str(&serde_json::to_string(&row)?);
                lines.push('\n');
            }
            out.write(&format!("bench-{}.jsonl", params.algo.name()), &lines)?;
            Ok(all)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Parameter(_) | Error::Generator(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
