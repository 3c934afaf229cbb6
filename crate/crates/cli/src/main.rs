//! `edgescout`: detect frequently occurring edges in binary panels, run the
//! simulation grid, and check null validity by Monte Carlo.
//!
//! Exit status: 0 success, 2 usage error, 3 data error, 4 internal error.

mod commands;
mod lambda;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use edgescout_core::{ErrorClass, PanelFormat, ScenarioTag};

#[derive(Debug, Parser)]
#[command(name = "edgescout", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select frequently occurring edges in a panel file.
    Detect(DetectArgs),
    /// Run the Monte Carlo grid for one scenario.
    Simulate(SimulateArgs),
    /// Check e-value validity and p-value super-uniformity under the null.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Matrix,
    Event,
}

impl From<FormatArg> for PanelFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Matrix => PanelFormat::MatrixCsv,
            FormatArg::Event => PanelFormat::EventCsv,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    BhM,
    By,
    Ebh,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Iid,
    Logistic,
    BernoulliVar,
    LevelShift,
    Periodic,
}

impl From<ScenarioArg> for ScenarioTag {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Iid => ScenarioTag::Iid,
            ScenarioArg::Logistic => ScenarioTag::Logistic,
            ScenarioArg::BernoulliVar => ScenarioTag::BernoulliVar,
            ScenarioArg::LevelShift => ScenarioTag::LevelShift,
            ScenarioArg::Periodic => ScenarioTag::Periodic,
        }
    }
}

#[derive(Debug, clap::Args)]
struct DetectArgs {
    /// Panel file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "matrix")]
    format: FormatArg,
    /// Null threshold on the connection probability.
    #[arg(long)]
    pi: f64,
    /// Target false discovery rate.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "ebh")]
    method: MethodArg,
    /// Use randomized BH thresholds (by, ebh); requires --seed.
    #[arg(long)]
    randomized: bool,
    /// plugin, const:X, schedule:PATH or schedule:default.
    #[arg(long, default_value = "plugin")]
    lambda: String,
    /// Plug-in cap; defaults to 1/pi - 0.01.
    #[arg(long)]
    lambda_bar: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "iid")]
    scenario: ScenarioArg,
    /// Comma-separated panel lengths.
    #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500")]
    grid_t: Vec<usize>,
    /// Comma-separated numbers of alternative edges.
    #[arg(long, value_delimiter = ',', default_value = "30,60,90,120,150")]
    grid_nalt: Vec<usize>,
    /// Number of edges.
    #[arg(long, default_value_t = 300)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    pi: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Comma-separated subset of bh-m, by, ebh, ebh-randomized.
    #[arg(long, value_delimiter = ',', default_value = "bh-m,by,ebh")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// plugin, const:X, schedule:PATH or schedule:default.
    #[arg(long, default_value = "plugin")]
    lambda: String,
    #[arg(long)]
    lambda_bar: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0.1)]
    pi: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Series length.
    #[arg(long, default_value_t = 100)]
    t: usize,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lambda_bar: Option<f64>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying a machine-readable code and an exit class.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: "USAGE",
            class: ErrorClass::Usage,
            message: message.into(),
        }
    }
}

impl From<edgescout_core::Error> for CliError {
    fn from(e: edgescout_core::Error) -> Self {
        CliError {
            code: e.code(),
            class: e.class(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        edgescout_core::Error::Io(e).into()
    }
}

fn exit_status(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Usage => 2,
        ErrorClass::Data => 3,
        ErrorClass::Internal => 4,
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("EDGESCOUT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "EDGESCOUT_THREADS={raw:?} is not a positive integer"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError {
            code: "INTERNAL",
            class: ErrorClass::Internal,
            message: e.to_string(),
        })
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Detect(a) => commands::detect(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Validate(a) => commands::validate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            ExitCode::from(exit_status(e.class))
        }
    }
}
