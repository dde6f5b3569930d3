//! Command-line front end: generate and check graphs, run single polls,
//! sweep Monte Carlo grids, and evaluate every closed-form quantity.

mod commands;
mod config;
mod csvout;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "epol",
    about = "Decentralized polling protocol simulator and analyzer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph from one of the known families and write it as an
    /// edge-list file.
    GenGraph(GenGraphArgs),
    /// Validate a graph file: degree floor, broadcast property, safety
    /// against a coalition, diameter and tolerance.
    Check(CheckArgs),
    /// Run a single poll from a config file.
    Run(RunArgs),
    /// Monte Carlo sweep: disclosure figures, fault grid and impact grid.
    Sweep(SweepArgs),
    /// Evaluate every closed-form value at one parameter point.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct GenGraphArgs {
    /// layered | backbone | geometric | cluster-ring | circle
    #[arg(long)]
    family: String,
    /// Broadcast redundancy to validate against (defaults per family).
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated layer sizes (layered).
    #[arg(long)]
    layers: Option<String>,
    /// Backbone clique size (backbone).
    #[arg(long)]
    backbone_size: Option<usize>,
    /// Comma-separated attachment counts for outer nodes (backbone).
    #[arg(long)]
    outer: Option<String>,
    /// Comma-separated positions (geometric).
    #[arg(long)]
    positions: Option<String>,
    /// Connection threshold (geometric).
    #[arg(long)]
    threshold: Option<f64>,
    /// Node count (cluster-ring, circle).
    #[arg(long)]
    n: Option<usize>,
    /// Privacy parameter wiring the cluster-ring/circle link structure.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Output path for the edge list.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Edge-list file to check.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    /// Comma-separated coalition ids for the safety check.
    #[arg(long)]
    coalition: Option<String>,
    /// Write witness orderings to this path.
    #[arg(long)]
    orderings_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Master seed (overrides config and EPOL_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides config).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write a message trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Override poll.alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override faults.crash_prob.
    #[arg(long)]
    crash_prob: Option<f64>,
    /// Override faults.loss_prob.
    #[arg(long)]
    loss_prob: Option<f64>,
    /// Override adversary.coalition_size.
    #[arg(long)]
    coalition_size: Option<usize>,
    /// Override run.trials.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for poll trials.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: usize,
    /// Network diameter for tolerance/security values.
    #[arg(long)]
    diameter: usize,
    /// Comma-separated gamma vector (decimals or fractions), k+1 entries.
    #[arg(long)]
    gamma: String,
    #[arg(long, default_value = "0.5")]
    alpha: String,
    #[arg(long, default_value_t = 0)]
    rho: usize,
    /// Crash probability for the failure columns.
    #[arg(long, default_value = "0")]
    r: String,
    /// Loss probability for the failure columns.
    #[arg(long, default_value = "0")]
    l: String,
    /// Maximum node degree for the message-complexity column.
    #[arg(long)]
    d0: Option<usize>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result: Result<()> = match cli.command {
        Command::GenGraph(args) => commands::gen_graph(args),
        Command::Check(args) => commands::check(args),
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Analyze(args) => commands::analyze(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
