//! Command implementations tying the core library to files on disk.

use std::fs;
use std::path::Path;

use morphoevo_core::de::DeConfig;
use morphoevo_core::ehgrn::EhGrnModel;
use morphoevo_core::fitness::FitnessConfig;
use morphoevo_core::genome::GrnTree;
use morphoevo_core::nsga2::{evolve, BudgetCounting, EvolutionConfig};
use morphoevo_core::scenario::{Scenario, ScenarioFields};
use morphoevo_core::sim::{run_model, SimConfig, SwarmModel};

use crate::args::{BaselineArg, CalibrateArgs, Cli, Command, EvolveArgs, SimulateArgs};
use crate::calibrate::{sweep, sweep_csv};
use crate::io::{
    pareto_csv, progress_csv, sha256_hex, to_json, EvaluationCounts, OutputDir, RunManifest,
    ScenarioSource,
};
use crate::svg::render_frame;
use crate::{CliError, Result};

/// Entry point used by the binary: sets up threads and dispatches.
pub fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
    }
}

/// Applies --threads, falling back to MORPHOEVO_THREADS, then rayon's
/// default. A pool that is already running is left untouched.
fn init_threads(flag: Option<usize>) -> Result<()> {
    let from_env = || -> Result<Option<usize>> {
        match std::env::var("MORPHOEVO_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("MORPHOEVO_THREADS={v} is not a number"))),
            Err(_) => Ok(None),
        }
    };
    let threads = match flag {
        Some(n) => Some(n),
        None => from_env()?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        // Ignore the error when a global pool already exists; results do
        // not depend on the thread count.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Accepts a scenario file path or a built-in name.
fn resolve_scenario(arg: &str) -> Result<(Scenario, ScenarioSource)> {
    let path = Path::new(arg);
    if path.is_file() {
        let bytes = fs::read(path)?;
        let scenario = Scenario::load(path)?;
        return Ok((
            scenario.clone(),
            ScenarioSource {
                name: scenario.name,
                source: arg.to_string(),
                sha256: sha256_hex(&bytes),
            },
        ));
    }
    if let Some(scenario) = Scenario::builtin(arg) {
        let canonical = toml::to_string_pretty(&scenario)
            .map_err(|e| CliError::Usage(format!("serialize built-in: {e}")))?;
        return Ok((
            scenario,
            ScenarioSource {
                name: arg.to_string(),
                source: format!("builtin:{arg}"),
                sha256: sha256_hex(canonical.as_bytes()),
            },
        ));
    }
    Err(CliError::Usage(format!(
        "scenario '{arg}' is neither a readable file nor a built-in \
         (channel, channel2, compound)"
    )))
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<()> {
    let (scenario, source) = resolve_scenario(&args.scenario)?;
    let counting = if args.count_inner_evals {
        BudgetCounting::Total
    } else {
        BudgetCounting::Outer
    };
    let cfg = EvolutionConfig {
        pop_size: args.pop,
        eval_budget: args.budget,
        seed: args.seed,
        counting,
        ..EvolutionConfig::default()
    };
    cfg.validate()?;
    let fields = ScenarioFields::new(scenario)?;
    let outcome = evolve(&fields, &cfg, &DeConfig::default(), &FitnessConfig::default())?;

    let mut out = OutputDir::create(&args.out)?;
    out.write("pareto.csv", &pareto_csv(&outcome.archive))?;
    out.write("progress.csv", &progress_csv(&outcome.progress))?;
    let mut manifest = RunManifest::new("evolve", source, args.seed);
    manifest.counting = Some(
        match counting {
            BudgetCounting::Total => "total",
            BudgetCounting::Outer => "outer",
        }
        .to_string(),
    );
    manifest.evaluations = Some(EvaluationCounts {
        total: outcome.total_evaluations,
        outer: outcome.outer_evaluations,
    });
    out.finish(manifest)
}

/// Reads --model as tree text, then as a path to tree text.
fn parse_model_arg(arg: &str) -> Result<GrnTree> {
    match GrnTree::parse(arg) {
        Ok(tree) => Ok(tree),
        Err(text_err) => {
            let path = Path::new(arg);
            if path.is_file() {
                let contents = fs::read_to_string(path)?;
                return GrnTree::parse(contents.trim()).map_err(|e| {
                    CliError::Usage(format!("model file {arg}: {e}"))
                });
            }
            Err(CliError::Usage(format!(
                "--model is neither a parsable tree ({text_err}) nor a file"
            )))
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let (scenario, source) = resolve_scenario(&args.scenario)?;
    let model = match (&args.model, args.baseline) {
        (Some(text), None) => SwarmModel::Tree(parse_model_arg(text)?),
        (None, Some(b)) => SwarmModel::Baseline(match b {
            BaselineArg::Task1 => EhGrnModel::task1(),
            BaselineArg::Task2 => EhGrnModel::task2(),
            BaselineArg::Task2Silent => EhGrnModel::task2_silent(),
        }),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --model or --baseline is required".into(),
            ))
        }
    };
    let fields = ScenarioFields::new(scenario.clone())?;
    let report = run_model(&model, &fields, &SimConfig::default())?;

    let mut out = OutputDir::create(&args.out)?;
    out.write("report.json", &to_json(&report))?;
    for index in 0..report.waypoints.len() {
        out.write(
            &format!("frame_{index:03}.svg"),
            &render_frame(&scenario, &report, index),
        )?;
    }
    let mut manifest = RunManifest::new("simulate", source, args.seed);
    manifest.model = Some(report.model.clone());
    out.finish(manifest)
}

pub fn cmd_calibrate(args: &CalibrateArgs) -> Result<()> {
    let (scenario, source) = resolve_scenario(&args.scenario)?;
    let (rows, chosen) = sweep(&scenario)?;
    let table = sweep_csv(&rows);

    let mut out = OutputDir::create(&args.out)?;
    out.write("sweep.csv", &table)?;
    if let Some(calibration) = chosen {
        out.write("calibration.json", &to_json(&calibration))?;
        out.finish(RunManifest::new("calibrate", source, args.seed))?;
        Ok(())
    } else {
        out.finish(RunManifest::new("calibrate", source, args.seed))?;
        eprint!("{table}");
        Err(CliError::Infeasible(format!(
            "no (lambda_t, tau) pair kept the reference ring inside the \
             distance band for scenario '{}'",
            scenario.name
        )))
    }
}
