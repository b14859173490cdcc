use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::record::Format;

#[derive(Debug, Parser)]
#[command(
    name = "ehaoi",
    version,
    about = "Age-of-Information analysis for energy-harvesting status-update systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form metrics at one parameter point, cross-checked against
    /// the generic average-penalty integral.
    #[command(args_override_self = true)]
    Analyze(AnalyzeArgs),
    /// Closed-form metrics over a one-dimensional parameter grid.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Discrete-event simulation, side by side with the analytic values.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Matrix-geometric solution of the exponential-service model.
    #[command(args_override_self = true)]
    Qbd(QbdArgs),
    /// Run the built-in cross-validation checks and print a pass/fail table.
    #[command(args_override_self = true)]
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DisciplineArg {
    Fcfs,
    Lcfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Linear,
    Exp,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ServiceArg {
    Zero,
    Exp,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value = "fcfs")]
    pub discipline: DisciplineArg,
    /// Status packet arrival rate.
    #[arg(long)]
    pub lambda: f64,
    /// Energy packet arrival rate.
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Data buffer capacity K.
    #[arg(long, default_value_t = 0)]
    pub buffer: usize,
    /// Battery capacity B.
    #[arg(long, default_value_t = 1)]
    pub battery: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PenaltyArgs {
    #[arg(long, value_enum, default_value = "linear")]
    pub penalty: PenaltyArg,
    /// Exponent of the exponential penalty.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Threshold of the step penalty.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write to this file instead of stdout. Relative paths resolve against
    /// $EHAOI_OUTPUT_DIR when it is set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweptArg {
    Theta,
    Lambda,
    #[value(name = "r", alias = "rate")]
    R,
    #[value(name = "K", alias = "buffer")]
    K,
    #[value(name = "B", alias = "battery")]
    B,
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    ValidRate,
    AvgAoi,
    AvgPeakAoi,
    MeanSojourn,
    AvgPenalty,
    EnginePenalty,
    AsymptoticPenalty,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ValidRate => "valid_rate",
            Metric::AvgAoi => "avg_aoi",
            Metric::AvgPeakAoi => "avg_peak_aoi",
            Metric::MeanSojourn => "mean_sojourn",
            Metric::AvgPenalty => "avg_penalty",
            Metric::EnginePenalty => "engine_penalty",
            Metric::AsymptoticPenalty => "asymptotic_penalty",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary.
    #[arg(long, value_enum)]
    pub param: SweptArg,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of grid points (at least 2).
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Space the grid logarithmically.
    #[arg(long)]
    pub log: bool,
    /// Disciplines to evaluate, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "fcfs")]
    pub discipline: Vec<DisciplineArg>,
    /// Status arrival rate (unused when sweeping theta).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Fixed theta = lambda / r when sweeping r or another parameter.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub buffer: usize,
    #[arg(long, default_value_t = 1)]
    pub battery: usize,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Metrics to emit, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "avg-penalty")]
    pub metrics: Vec<Metric>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    #[arg(long, value_enum, default_value = "zero")]
    pub service: ServiceArg,
    /// Service rate for `--service exp`.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Stop after this many events (default 1000000).
    #[arg(long, conflicts_with_all = ["time", "valid_updates"])]
    pub events: Option<u64>,
    /// Stop at this simulated time.
    #[arg(long, conflicts_with = "valid_updates")]
    pub time: Option<f64>,
    /// Stop after this many valid updates.
    #[arg(long)]
    pub valid_updates: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leading fraction of the horizon excluded from statistics.
    #[arg(long, default_value_t = 0.1)]
    pub warmup: f64,
    /// Write a tab-separated event log to this file.
    #[arg(long)]
    pub event_log: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QbdArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long)]
    pub battery: usize,
    #[arg(long, default_value_t = ehaoi_core::qbd::DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = ehaoi_core::qbd::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Sweep lambda over [from, to] instead of using --lambda.
    #[arg(long, requires_all = ["from", "to"])]
    pub sweep_lambda: bool,
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 19)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Valid updates per simulation check.
    #[arg(long, default_value_t = 200_000)]
    pub updates: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
