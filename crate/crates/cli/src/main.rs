//! `impsel`: run selection mechanisms on graph files, plan thresholds,
//! audit mechanisms and inspect composition graphs.
//!
//! Exit status: 0 on success, 1 when an audit finds a violation, 2 on
//! usage, parse or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand};
use impsel::graph::DEFAULT_ENUMERATION_CAP;
use impsel::partition::{DEFAULT_CERTIFICATE_CAP, DEFAULT_COMPOSITION_CAP};
use impsel::{DirectedGraph, GraphClassSpec, MechanismId, ThresholdPair};

mod commands;
mod render;

#[derive(Parser, Debug)]
#[command(name = "impsel", version, about = "Impartial selection on nomination graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a mechanism on a graph file
    Run(RunArgs),
    /// Plan or validate twin thresholds for G_n(k)
    Plan(PlanArgs),
    /// Audit a mechanism over a graph class
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Compositions, multiplicities and the infeasibility certificate
    Partitions(PartitionArgs),
    /// Pad a graph to more vertices
    #[command(subcommand)]
    Reduce(ReduceCommand),
}

/// Outdegree bound: an integer or `unbounded`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutdegreeBound {
    Bounded(usize),
    Unbounded,
}

impl FromStr for OutdegreeBound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "unbounded" {
            return Ok(OutdegreeBound::Unbounded);
        }
        s.parse()
            .map(OutdegreeBound::Bounded)
            .map_err(|_| format!("expected a positive integer or `unbounded`, got `{s}`"))
    }
}

impl OutdegreeBound {
    fn resolve(self, n: usize) -> usize {
        match self {
            OutdegreeBound::Bounded(k) => k,
            OutdegreeBound::Unbounded => n.saturating_sub(1),
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("rule").args(["mechanism", "upper"]).required(true)))]
pub struct RunArgs {
    /// Graph file
    #[arg(long)]
    graph: PathBuf,
    /// Upper (selection) threshold of the twin threshold mechanism
    #[arg(long = "T", requires = "lower")]
    upper: Option<usize>,
    /// Lower (deletion) threshold of the twin threshold mechanism
    #[arg(long = "t", requires = "upper")]
    lower: Option<usize>,
    /// Any registered mechanism, e.g. `majority` or `twin:3,2`
    #[arg(long, conflicts_with_all = ["upper", "lower"])]
    mechanism: Option<MechanismId>,
    /// Include the deletion trace
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long)]
    n: usize,
    /// Maximum outdegree, or `unbounded`
    #[arg(long, default_value = "1")]
    k: OutdegreeBound,
    /// Exponent with k ≤ c·n^kappa
    #[arg(long)]
    kappa: Option<f64>,
    /// Constant with k ≤ c·n^kappa
    #[arg(long)]
    c: Option<f64>,
    /// Validate this upper threshold instead of planning
    #[arg(long = "T", requires = "lower")]
    upper: Option<usize>,
    /// Validate this lower threshold instead of planning
    #[arg(long = "t", requires = "upper")]
    lower: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ClassArgs {
    #[arg(long)]
    n: usize,
    /// Maximum outdegree, or `unbounded`
    #[arg(long, default_value = "unbounded")]
    k: OutdegreeBound,
    /// Require every vertex to nominate someone
    #[arg(long)]
    positive_outdegree: bool,
}

impl ClassArgs {
    fn spec(&self) -> anyhow::Result<GraphClassSpec> {
        let k = match self.k {
            OutdegreeBound::Bounded(k) => Some(k),
            OutdegreeBound::Unbounded => None,
        };
        Ok(GraphClassSpec::new(self.n, k, self.positive_outdegree)?)
    }
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("mode").args(["exhaustive", "samples"]).required(true)))]
pub struct ModeArgs {
    /// Visit every graph of the class
    #[arg(long)]
    exhaustive: bool,
    /// Check this many sampled graphs (needs --seed)
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long)]
    jobs: Option<usize>,
    /// Largest class an exhaustive pass may enumerate
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Subcommand, Debug)]
pub enum AuditCommand {
    /// Search for vertices that change their own selection by deviating
    Impartiality {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Violation witnesses to report
        #[arg(long, default_value_t = 10)]
        max_witnesses: usize,
        #[arg(long)]
        json: bool,
    },
    /// Worst additive gap over the class
    Gap {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Check deletion-trace invariants on one graph or on sampled graphs
    Trace(TraceArgs),
    /// Check the symmetrized randomized mechanism over a class (n ≤ 7)
    Symmetrize {
        #[arg(long)]
        mechanism: MechanismId,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").args(["graph", "n"]).required(true)))]
pub struct TraceArgs {
    /// Check a single graph file
    #[arg(long, conflicts_with_all = ["samples", "seed"])]
    graph: Option<PathBuf>,
    /// Vertex count of the sampled class
    #[arg(long, requires_all = ["samples", "seed"])]
    n: Option<usize>,
    /// Maximum outdegree of the sampled class, or `unbounded`
    #[arg(long, default_value = "unbounded")]
    k: OutdegreeBound,
    #[arg(long)]
    positive_outdegree: bool,
    /// Upper threshold; planned from n and k when omitted
    #[arg(long = "T", requires = "lower")]
    upper: Option<usize>,
    #[arg(long = "t", requires = "upper")]
    lower: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    #[arg(long)]
    n: usize,
    /// Add constraint signs and the infeasibility certificate
    #[arg(long)]
    certificate: bool,
    /// Verify the transition structure
    #[arg(long)]
    transitions: bool,
    /// Largest n accepted (defaults: 24, or 12 with --certificate)
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    json: bool,
}

impl PartitionArgs {
    fn composition_cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_COMPOSITION_CAP)
    }

    fn certificate_cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_CERTIFICATE_CAP)
    }
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Target vertex count
    #[arg(long)]
    n: usize,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ReduceCommand {
    /// Add isolated vertices
    Isolated(ReduceArgs),
    /// Add vertices nominating every original vertex (composition graphs only)
    Inneighbors(ReduceArgs),
}

fn read_graph(path: &Path) -> anyhow::Result<DirectedGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    impsel::parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn thresholds(upper: Option<usize>, lower: Option<usize>) -> anyhow::Result<Option<ThresholdPair>> {
    match (upper, lower) {
        (Some(u), Some(l)) => Ok(Some(ThresholdPair::new(u, l)?)),
        (None, None) => Ok(None),
        _ => bail!("--T and --t go together"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Plan(args) => commands::plan(&args),
        Command::Audit(cmd) => commands::audit(&cmd),
        Command::Partitions(args) => commands::partitions(&args),
        Command::Reduce(cmd) => commands::reduce(&cmd),
    };
    match result {
        Ok(clean) => ExitCode::from(if clean { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
