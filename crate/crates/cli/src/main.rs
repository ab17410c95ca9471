//! `sds`: sampling, analysis, selection and preventive-control pipeline.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::{CliError, EXIT_INTERNAL, EXIT_USAGE};

/// Default seed when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_170_825;

#[derive(Debug, Parser)]
#[command(name = "sds", version, about = "Hurricane line-failure sampling and preventive unit commitment")]
pub struct Cli {
    /// Master seed (recorded in the manifest).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory for relative output paths.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a canned case bundle (grid.json, track.csv, config.json).
    Toy(ToyArgs),
    /// Sample a scenario pool.
    Sample(SampleArgs),
    /// Per-timestep tail metrics of a pool.
    Analyze(AnalyzeArgs),
    /// Select weighted scenarios from a pool.
    Select(SelectArgs),
    /// Solve the preventive-control commitment over a selection.
    Plan(PlanArgs),
    /// Redispatch test scenarios under a plan.
    Evaluate(EvaluateArgs),
    /// Side-by-side tail table of two pools.
    Report(ReportArgs),
    /// Check a data file against its schema.
    Validate(ValidateArgs),
    /// Two-component failure-correlation grid.
    Sensitivity(SensitivityArgs),
    /// Linearization deviation over a mesh around the reference storm.
    Lindev(LindevArgs),
    /// Rerun the command recorded in a manifest and compare output hashes.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Toy(_) => "toy",
            Command::Sample(_) => "sample",
            Command::Analyze(_) => "analyze",
            Command::Select(_) => "select",
            Command::Plan(_) => "plan",
            Command::Evaluate(_) => "evaluate",
            Command::Report(_) => "report",
            Command::Validate(_) => "validate",
            Command::Sensitivity(_) => "sensitivity",
            Command::Lindev(_) => "lindev",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    /// micro2, ring6 or coastal12.
    pub name: String,
    /// Bundle directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Sds,
    Smc,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub track: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Relevance threshold on predicted per-interval failure probability.
    #[arg(long, default_value_t = 1e-4)]
    pub p_threshold: f64,
    /// Predicted wind (m/s) below which a segment is calm.
    #[arg(long, default_value_t = 0.1)]
    pub min_wind: f64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Fraction of the sample used as Hill exceedances.
    #[arg(long, default_value_t = 0.05)]
    pub k_frac: f64,
    /// Shift added to counts before the Hill estimator.
    #[arg(long, default_value_t = 1.0)]
    pub shift: f64,
    #[arg(long, default_value_t = 20)]
    pub min_exceedances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Random,
    Stratified,
    Worst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Weighting {
    Count,
    FlowLimit,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long, value_enum)]
    pub rule: Rule,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Proxy severity. `flow-limit` needs `--grid`.
    #[arg(long, value_enum, default_value_t = Weighting::Count)]
    pub weighting: Weighting,
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Highs,
    Exhaustive,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Backend::Highs)]
    pub backend: Backend,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-3)]
    pub gap: f64,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub selection: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// System reserve as a fraction of demand.
    #[arg(long, default_value_t = 0.0)]
    pub reserve: f64,
    /// Also write the extensive-form model in MPS format.
    #[arg(long)]
    pub mps: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Selection file, or a `.jsonl` pool (uniform weights).
    #[arg(long)]
    pub test_pool: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Two pools to compare.
    #[arg(long, num_args = 2, value_names = ["POOL_A", "POOL_B"])]
    pub compare: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a gnuplot script plotting the table.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub k_frac: f64,
    #[arg(long, default_value_t = 1.0)]
    pub shift: f64,
    #[arg(long, default_value_t = 20)]
    pub min_exceedances: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Samples per cell.
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct LindevArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub cells: usize,
    /// Half width of the square mesh (km).
    #[arg(long, default_value_t = 250.0)]
    pub half_width: f64,
    /// Perturbation sizes in units of σ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, 1.0])]
    pub multipliers: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("{}", CliError::Usage("--workers must be >= 1".into()));
            return ExitCode::from(EXIT_USAGE as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("{}", CliError::Internal(e.to_string()));
            return ExitCode::from(EXIT_INTERNAL as u8);
        }
    }
    match commands::execute(&cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
