//! `vafx`: generate trajectories, extract argumentation agents from them and
//! evaluate the result.

mod error;
mod eval;
mod extract;
mod gen;
mod policy;
mod run_dir;
mod setup;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vaf_extract::environments::GroundTruthStyle;
use vaf_extract::trajectories::Format;

use crate::policy::PolicySpec;

#[derive(Parser)]
#[command(
    name = "vafx",
    version,
    about = "Extract value-based argumentation agents from trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy in an environment and log its trajectories.
    Gen(GenArgs),
    /// Extract one argumentation agent per team member from trajectories.
    Extract(ExtractArgs),
    /// Score, benchmark, inspect or plot extracted agents.
    Eval {
        #[command(subcommand)]
        action: EvalCommand,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Agreement with logged or freshly generated actions.
    Fidelity(FidelityArgs),
    /// Episode outcomes and per-decision latency.
    Bench(BenchArgs),
    /// Highest-valued primary arguments per agent.
    Inspect(InspectArgs),
    /// Actions over a Mountain Car state grid.
    Grid(GridArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    KeeperBlocks,
    Interleaved,
}

impl From<StyleArg> for GroundTruthStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::KeeperBlocks => GroundTruthStyle::KeeperBlocks,
            StyleArg::Interleaved => GroundTruthStyle::Interleaved,
        }
    }
}

/// Environment selection shared by commands that run episodes.
#[derive(Args, Clone)]
struct EnvArgs {
    /// `mountain_car` or `takeaway_synth`.
    #[arg(long)]
    env: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: u64,
    /// Root seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON document `{"seed", "mc", "grid", "takeaway"}`.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    env: EnvArgs,
    /// `scripted`, `ground_truth` or `model:<file or directory>`.
    #[arg(long)]
    policy: PolicySpec,
    /// Ranking shape of takeaway ground-truth teams.
    #[arg(long, value_enum, default_value = "keeper-blocks")]
    style: StyleArg,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long)]
    catalog: PathBuf,
    /// JSON extraction config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pruning threshold; overrides the config file.
    #[arg(long)]
    threshold: Option<u64>,
    /// Fallback action of every agent; overrides the config file.
    #[arg(long)]
    default_action: Option<String>,
    /// One ordering over all arguments for the whole team.
    #[arg(long)]
    joint: bool,
    /// Trajectory format; guessed from the file extension by default.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
}

#[derive(Args)]
struct FidelityArgs {
    /// Model file or directory of `agent_*.model.json`.
    #[arg(long)]
    model: PathBuf,
    /// Logged trajectories to score against.
    #[arg(long, required_unless_present = "holdout", conflicts_with = "holdout")]
    trajectories: Option<PathBuf>,
    /// Score against fresh episodes of `--original` instead.
    #[arg(long, requires_all = ["original", "env", "episodes"])]
    holdout: bool,
    /// Policy producing held-out episodes: `scripted` or `model:<path>`.
    #[arg(long)]
    original: Option<PolicySpec>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    episodes: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    threads: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// `scripted` or `model:<path>`.
    #[arg(long)]
    model: PolicySpec,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// `scripted` or `model:<path>` of a single Mountain Car agent.
    #[arg(long)]
    model: PolicySpec,
    /// Position bins x velocity bins, e.g. `20x20`.
    #[arg(long, default_value = "20x20")]
    res: String,
    /// `pos_lo,pos_hi,vel_lo,vel_hi`; the whole state space by default.
    #[arg(long)]
    ranges: Option<String>,
    /// Second policy to plot and diff against.
    #[arg(long)]
    compare: Option<PolicySpec>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => gen::run(args),
        Command::Extract(args) => extract::run(args),
        Command::Eval { action } => match action {
            EvalCommand::Fidelity(args) => eval::fidelity(args),
            EvalCommand::Bench(args) => eval::bench(args),
            EvalCommand::Inspect(args) => eval::inspect(args),
            EvalCommand::Grid(args) => eval::grid(args),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vafx: {e}");
            e.exit_code()
        }
    }
}
