//! Command-line surface, parsed with clap.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "morphoevo",
    version,
    about = "Evolve and simulate GRN controllers for swarm pattern formation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for field evaluation; falls back to the
    /// MORPHOEVO_THREADS environment variable, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve tree controllers against a scenario, writing the final
    /// non-dominated set and per-generation progress.
    Evolve(EvolveArgs),
    /// Run one controller along a scenario trajectory, writing a report
    /// and one SVG frame per waypoint.
    Simulate(SimulateArgs),
    /// Sweep field constants until a reference ring lands inside the
    /// target distance band, writing the chosen values and the sweep table.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// Scenario file path or built-in name (channel, channel2, compound).
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective-evaluation budget; see --count-inner-evals for what counts.
    #[arg(long, default_value_t = 4000)]
    pub budget: u64,
    /// Population size; must be even.
    #[arg(long, default_value_t = 40)]
    pub pop: usize,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// true: threshold-tuning evaluations count against the budget;
    /// false: only one evaluation per individual counts.
    #[arg(long, value_name = "BOOL", default_value_t = true, action = clap::ArgAction::Set)]
    pub count_inner_evals: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file path or built-in name (channel, channel2, compound).
    pub scenario: String,
    /// Controller tree as text, or a path to a file containing one.
    #[arg(long, conflicts_with = "baseline")]
    pub model: Option<String>,
    /// Hand-designed baseline network instead of a tree.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

/// Baseline wirings selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    /// First-task network.
    Task1,
    /// Second-task network, third branch fed from the second input.
    Task2,
    /// Second-task network with the third branch disabled.
    Task2Silent,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Scenario file path or built-in name (channel, channel2, compound).
    pub scenario: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}
