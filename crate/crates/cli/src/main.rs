//! Scenario-driven command line front end.
//!
//! Every subcommand loads a JSON scenario document, runs the job, writes
//! `report.json` plus the job's artifacts into the output directory, and
//! exits 0 when every enabled check passed, 1 on a check failure, and 2 on
//! input errors.

mod run;
mod scenario;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scenario::{JobSpec, Mode, ScenarioDoc};

#[derive(Parser)]
#[command(
    name = "dilemma",
    about = "Iterated prisoner's dilemma laboratory: matches, plan classification, Nash constructions, replicator dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario document (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for report.json and artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario's arithmetic mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Override a sweep's seed range, as `start..end` (inclusive).
    #[arg(long, value_parser = parse_seed_range)]
    seed_range: Option<(u64, u64)>,
}

fn parse_mode(text: &str) -> Result<Mode, String> {
    match text {
        "rational" => Ok(Mode::Rational),
        "float" => Ok(Mode::Float),
        other => Err(format!("unknown mode {other:?} (rational|float)")),
    }
}

fn parse_seed_range(text: &str) -> Result<(u64, u64), String> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| "expected start..end".to_string())?;
    let start: u64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
    let end: u64 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
    if end < start {
        return Err("empty seed range".into());
    }
    Ok((start, end))
}

#[derive(Subcommand)]
enum Command {
    /// Run a single match and its checks.
    Simulate(CommonArgs),
    /// Report a plan's classification flags.
    Classify(CommonArgs),
    /// Build a strong Nash pair for a target payoff and verify it.
    Folk(CommonArgs),
    /// Replicator dynamics over a roster of simple plans.
    Evo(CommonArgs),
    /// Validate a separation path.
    ValidatePath(CommonArgs),
    /// Run a match check over a range of seeds.
    Sweep(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Classify(a)
            | Command::Folk(a)
            | Command::Evo(a)
            | Command::ValidatePath(a)
            | Command::Sweep(a) => a,
        }
    }

    fn expected_kind(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "match",
            Command::Classify(_) => "classify",
            Command::Folk(_) => "folk",
            Command::Evo(_) => "evo",
            Command::ValidatePath(_) => "validate-path",
            Command::Sweep(_) => "sweep",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: &Command) -> anyhow::Result<bool> {
    let args = command.common();
    let text = fs::read_to_string(&args.scenario).map_err(|e| {
        anyhow::anyhow!("reading scenario {}: {e}", args.scenario.display())
    })?;
    let mut doc: ScenarioDoc = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("parsing scenario: {e}"))?;

    if let Some(mode) = args.mode {
        doc.mode = mode;
    }
    if let Some((start, end)) = args.seed_range {
        match &mut doc.job {
            JobSpec::Sweep { seeds, .. } => {
                seeds.start = start;
                seeds.end = end;
            }
            _ => anyhow::bail!("--seed-range only applies to sweep jobs"),
        }
    }

    let kind = match &doc.job {
        JobSpec::Match { .. } => "match",
        JobSpec::Classify { .. } => "classify",
        JobSpec::Folk { .. } => "folk",
        JobSpec::Evo { .. } => "evo",
        JobSpec::ValidatePath { .. } => "validate-path",
        JobSpec::Sweep { .. } => "sweep",
    };
    if kind != command.expected_kind() {
        anyhow::bail!(
            "scenario holds a {kind:?} job but the subcommand expects {:?}",
            command.expected_kind()
        );
    }

    let report = run::run(&doc, &text, &args.out)?;
    let report_path = args.out.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;

    for check in &report.checks {
        println!(
            "{} {} — {}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!(
        "report: {} ({} checks, digest {})",
        report_path.display(),
        report.checks.len(),
        report.inputs_digest
    );
    Ok(report.pass)
}
