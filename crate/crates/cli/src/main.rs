//! `depshap`: attribute dependence to features from CSV data, simulate the
//! synthetic processes, and rerun the reference experiments.
//!
//! Exit codes: 0 success, 1 I/O failure while writing, 2 malformed
//! configuration, 3 data validation failure, 4 numerical failure, 5 a
//! scenario check failed (its report is still written). Errors are printed as
//! a single `error kind=<kind> message=<json string>` line on stderr.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    ScenarioFailed(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Numeric(_) => "numeric",
            CliError::ScenarioFailed(_) => "scenario",
            CliError::Io(_) => "io",
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::ScenarioFailed(_) => 5,
        }
    }
}

impl From<depshap::Error> for CliError {
    fn from(e: depshap::Error) -> Self {
        use depshap::Error as E;
        let msg = e.to_string();
        if e.is_numeric() {
            return CliError::Numeric(msg);
        }
        match e {
            E::TooFewRows { .. }
            | E::RowCountMismatch { .. }
            | E::NonFinite { .. }
            | E::DuplicateColumn(_)
            | E::UnknownColumn(_)
            | E::ShapeMismatch { .. } => CliError::Data(msg),
            _ => CliError::Config(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "depshap",
    version,
    about = "Shapley attribution of statistical dependence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose the dependence between a target column and the features of a CSV file.
    Attribute(AttributeArgs),
    /// Write a simulated dataset as CSV (label column `y`, features `x1..xd`).
    Simulate(SimulateArgs),
    /// Rerun a reference experiment and check its outcome.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    R2,
    Dc,
    Aidc,
    Hsic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Mc,
    Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Labels,
    Predictions,
    Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DgpArg {
    Quadratic,
    Xor,
    Drift,
    Interaction,
}

#[derive(Args, Debug)]
pub struct AttributeArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for report.json and attributions.csv.
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
    /// Label column.
    #[arg(long, default_value = "y")]
    pub label_col: String,
    /// Prediction column (needed for predictions, residuals and --delta).
    #[arg(long)]
    pub pred_col: Option<String>,
    /// Which target to decompose.
    #[arg(long, value_enum, default_value_t = KindArg::Labels)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = MeasureArg::Dc)]
    pub measure: MeasureArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// Permutations for --method mc.
    #[arg(long, default_value_t = 1000)]
    pub permutations: usize,
    /// Seed for permutations and resampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Blocks for --method block: feature names, `,` within and `;` between blocks.
    #[arg(long)]
    pub blocks: Option<String>,
    /// Resamples for the 95% bands (0 disables them).
    #[arg(long, default_value_t = 0)]
    pub bootstrap_resamples: usize,
    /// Rows per resample; equal to the row count means drawing with replacement [default: all rows].
    #[arg(long)]
    pub resample_size: Option<usize>,
    /// Comma-separated feature names to attribute to [default: all features].
    #[arg(long)]
    pub features: Option<String>,
    /// Report values divided by their sum.
    #[arg(long, default_value_t = false)]
    pub normalize: bool,
    /// Flag features whose ADP and ADL differ by at least this much.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub dgp: DgpArg,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time step for the drift process.
    #[arg(long, default_value_t = 0)]
    pub t: u32,
    /// Quadratic coefficients, comma separated.
    #[arg(long, default_value = "0,2,4,6,8")]
    pub coeffs: String,
    /// Drift process with only its first four features.
    #[arg(long, default_value_t = false)]
    pub narrow: bool,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// fig1_r2, fig2_decompositions, table1_xor, fig3_drift, fig4_misspec, fig5_correct, or all.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = depshap::scenarios::DEFAULT_RESAMPLES)]
    pub bootstrap_resamples: usize,
    #[arg(long, default_value = "out")]
    pub output_dir: PathBuf,
}

fn report_error(e: &CliError) -> ExitCode {
    let message = serde_json::to_string(&e.to_string()).expect("string serializes");
    eprintln!("error kind={} message={message}", e.kind());
    ExitCode::from(e.code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().to_string();
            return report_error(&CliError::Config(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    let result = match &cli.command {
        Command::Attribute(args) => commands::attribute(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Reproduce(args) => commands::reproduce(args),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report_error(&e),
    }
}
