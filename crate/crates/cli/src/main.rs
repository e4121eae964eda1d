use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photon_fabric::devices::DeviceKind;
use photon_fabric::fabric::ArchitectureKind;
use serde::Serialize;

mod artifacts;
mod cache;
mod commands;
mod config;
mod error;

use config::{load, Scale};
use error::CliError;

/// Inverse design of pixelated photonic devices and switch-fabric simulation.
#[derive(Parser)]
#[command(name = "photon-fabric", version)]
struct Cli {
    /// Worker threads for concurrent solves (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a device from a seeded starting density.
    Optimize(OptimizeArgs),
    /// Report ratios, loss and crosstalk of a density file.
    Evaluate(EvaluateArgs),
    /// Wavelength sweep of a density file plus fitted resonances.
    Sweep(SweepArgs),
    /// Generate an architecture layout and its component counts.
    Circuit(CircuitArgs),
    /// Solve switch settings for a request and verify them by tracing.
    Route(RouteArgs),
    /// Spectra and per-path loss of a layout in a given state.
    Simulate(SimulateArgs),
    /// Architecture count table and device metrics of earlier runs.
    Report(ReportArgs),
}

// Flags serialize to the same keys as the config file; unset flags are
// dropped so they do not mask file values.

#[derive(Args, Serialize)]
struct OptimizeArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    device: Option<DeviceKind>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<Scale>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    init_jitter: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    device: Option<DeviceKind>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<Scale>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<Scale>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    start_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct CircuitArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<ArchitectureKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    colors: Option<usize>,
    /// Comma-separated resonances in nm.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    palette: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RouteArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<PathBuf>,
    /// A request object, or an array of them for a batch run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    request: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    start_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    step_nm: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output directories of optimize or evaluate runs.
    #[arg(long = "run")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    runs: Vec<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn merged<A: Serialize, C: serde::de::DeserializeOwned>(file: &Option<PathBuf>, args: &A) -> Result<C, CliError> {
    load(file.as_deref(), serde_json::to_value(args)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    match &cli.command {
        Command::Optimize(a) => commands::device::optimize(&merged(&a.config, a)?),
        Command::Evaluate(a) => commands::device::evaluate(&merged(&a.config, a)?),
        Command::Sweep(a) => commands::device::sweep(&merged(&a.config, a)?),
        Command::Circuit(a) => commands::fabric::circuit(&merged(&a.config, a)?),
        Command::Route(a) => commands::fabric::route(&merged(&a.config, a)?),
        Command::Simulate(a) => commands::fabric::simulate(&merged(&a.config, a)?),
        Command::Report(a) => commands::report::report(&merged(&a.config, a)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
