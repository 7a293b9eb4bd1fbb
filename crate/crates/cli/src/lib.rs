//! Command-line harness: simulation runs, the path-error experiment, detection
//! evaluation, lot generation and the backend server.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use haris_core::runner::{Controller, LocalizationMode};

pub mod commands;
pub mod server;

pub const LOG_ENV: &str = "HARIS_LOG_LEVEL";

#[derive(Debug, Parser)]
#[command(name = "haris", version, about = "Parking-assistant robot simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one mission and write trajectory, map, sightings and metrics.
    Run(RunArgs),
    /// Cross-track error along a straight path per localization mode and speed.
    Experiment(ExperimentArgs),
    /// Score a detections CSV against ground truth.
    Eval(EvalArgs),
    /// Generate a parking-lot world file.
    Genworld(GenworldArgs),
    /// Run the simulation live behind the HTTP and WebSocket API.
    Serve(ServeArgs),
}

/// Options shared by every command that drives the simulation.
#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Scenario file (JSON). The built-in corridor is used when omitted.
    #[arg(long)]
    pub world: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "fused")]
    pub mode: LocalizationMode,
    #[arg(long, value_enum, default_value = "dwa")]
    pub controller: ControllerArg,
    /// Cruise speed, m/s.
    #[arg(long, default_value_t = 0.5)]
    pub speed: f64,
    #[arg(long, default_value_t = 500)]
    pub particles: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ControllerArg {
    Dwa,
    PurePursuit,
}

impl From<ControllerArg> for Controller {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Dwa => Controller::Dwa,
            ControllerArg::PurePursuit => Controller::PurePursuit,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Mission file (JSON: id, waypoints, optional arrival_tolerance).
    #[arg(long, conflicts_with = "sweep")]
    pub mission: Option<PathBuf>,
    /// Drive a lane sweep past every row of parked cars instead of a mission file.
    #[arg(long)]
    pub sweep: bool,
    /// Simulated time limit, s.
    #[arg(long, default_value_t = 600.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Scenario file; the built-in corridor when omitted.
    #[arg(long)]
    pub world: Option<PathBuf>,
    /// Length of the straight reference path ahead of the station, m.
    #[arg(long, default_value_t = 20.0)]
    pub length: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1.0")]
    pub speeds: Vec<f64>,
    /// Seeds 1..=N.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Override the scenario's GPS noise, m.
    #[arg(long)]
    pub gps_std: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub particles: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub groundtruth: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Also write report.csv and pr_curve.csv here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenworldArgs {
    #[arg(long, default_value_t = 2)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    /// Bay width, m.
    #[arg(long, default_value_t = 3.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory for the sightings journal; in-memory store when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Simulated seconds per wall-clock second. 0 runs missions as fast as possible.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
}

/// Installs the logger from `HARIS_LOG_LEVEL` (error, warn, info, debug; default warn).
pub fn init_logging() {
    let level = std::env::var(LOG_ENV).unwrap_or_default();
    let filter = match level.to_ascii_lowercase().as_str() {
        "" => "warn".to_string(),
        l @ ("error" | "warn" | "info" | "debug" | "trace") => l.to_string(),
        other => {
            eprintln!("{LOG_ENV}={other:?} is not one of error, warn, info, debug; using warn");
            "warn".to_string()
        }
    };
    let _ = env_logger::Builder::new().parse_filters(&filter).try_init();
}

pub fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Genworld(a) => commands::genworld(&a),
        Command::Serve(a) => server::serve(&a),
    }
}
