use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::{Failure, Usage};

#[derive(Parser, Debug)]
#[command(name = "taylor", version, about = "Taylor-rule estimation: OLS re-estimation and a small neural network")]
struct Cli {
    /// `key = value` config file; command-line flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read four FRED CSV exports and write the aligned quarterly panel.
    Ingest(IngestArgs),
    /// Regress the fed funds rate (or a rule-generated target) on inflation and the output gap.
    FitOls(FitOlsArgs),
    /// Regress a preset's own rates and compare with the analytic coefficients.
    CheckModel(CheckModelArgs),
    /// Train the network on a panel by online gradient descent.
    TrainMl(TrainArgs),
    /// Apply a trained network to a panel.
    MlEstimate(MlEstimateArgs),
    /// Compare rule, OLS, and network estimates; write CSVs and SVG figures.
    Evaluate(EvaluateArgs),
    /// Print the rate prescribed by a rule.
    Simulate(SimulateArgs),
    /// Render an SVG chart from a comparison CSV.
    Plot(PlotArgs),
    /// Run ingest, fit-ols, check-model, train-ml, and evaluate from the config file.
    Run(RunArgs),
}

#[derive(Args, Debug)]
pub struct TargetArgs {
    /// Equilibrium real rate r* (percent).
    #[arg(long, value_name = "V")]
    pub rstar: Option<f64>,
    /// Inflation target pi* (percent).
    #[arg(long, value_name = "V")]
    pub pistar: Option<f64>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Fed funds rate CSV (DATE,value).
    #[arg(long, value_name = "CSV")]
    pub fedfunds: Option<PathBuf>,
    /// Price index (cpi_yoy) or inflation rate (rate) CSV.
    #[arg(long, value_name = "CSV")]
    pub inflation: Option<PathBuf>,
    /// Real GDP CSV.
    #[arg(long, value_name = "CSV")]
    pub gdp: Option<PathBuf>,
    /// Potential real GDP CSV.
    #[arg(long, value_name = "CSV")]
    pub potential_gdp: Option<PathBuf>,
    /// cpi_yoy or rate.
    #[arg(long, value_name = "MEASURE")]
    pub inflation_measure: Option<String>,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitOlsArgs {
    /// Panel CSV written by `ingest`.
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    /// Regress this preset's rates instead of the actual fed funds rate.
    #[arg(long, value_name = "PRESET")]
    pub target_rule: Option<String>,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckModelArgs {
    /// Panel CSV written by `ingest`.
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    /// taylor1993 or ols_fitted.
    #[arg(long, value_name = "PRESET", default_value = "taylor1993")]
    pub preset: String,
    #[command(flatten)]
    pub targets: TargetArgs,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Panel CSV written by `ingest`.
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    /// Gradient-descent step size.
    #[arg(long, value_name = "V")]
    pub mu: Option<f64>,
    /// Maximum number of epochs.
    #[arg(long, value_name = "N")]
    pub epochs: Option<usize>,
    /// Initialization seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Standardize inputs to zero mean and unit variance.
    #[arg(long)]
    pub scale: bool,
    /// Number of hidden nodes.
    #[arg(long, value_name = "N")]
    pub hidden: Option<usize>,
    /// Convergence threshold on the largest in-sample |error|.
    #[arg(long, value_name = "V")]
    pub epsilon: Option<f64>,
    /// Hidden and output bias terms (true or false).
    #[arg(long, value_name = "BOOL")]
    pub biases: Option<bool>,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MlEstimateArgs {
    /// Weight dump written by `train-ml`.
    #[arg(long, value_name = "FILE")]
    pub network: PathBuf,
    /// Panel CSV written by `ingest`.
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output file; standard output if omitted.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Panel CSV written by `ingest`.
    #[arg(long, value_name = "CSV")]
    pub panel: Option<PathBuf>,
    /// Weight dump; if omitted a network is trained with the configured settings.
    #[arg(long, value_name = "FILE")]
    pub network: Option<PathBuf>,
    /// Divergence threshold on |error| in percentage points (default 2).
    #[arg(long, value_name = "V")]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub targets: TargetArgs,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// taylor1993, ols_fitted, or custom.
    #[arg(long, value_name = "RULE")]
    pub rule: String,
    /// Inflation (percent).
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub pi: f64,
    /// Output gap (percent).
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub gap: f64,
    /// Custom rule: coefficient on inflation itself.
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub beta1: Option<f64>,
    /// Custom rule: coefficient on the inflation gap.
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub betapi: Option<f64>,
    /// Custom rule: coefficient on the output gap.
    #[arg(long, value_name = "V", allow_hyphen_values = true)]
    pub betay: Option<f64>,
    #[command(flatten)]
    pub targets: TargetArgs,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Comparison CSV written by `evaluate`.
    #[arg(long, value_name = "CSV")]
    pub comparison: PathBuf,
    /// Comma-separated model names to include; all if omitted.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub models: Vec<String>,
    #[arg(long, value_name = "TEXT", default_value = "")]
    pub title: String,
    #[arg(long, value_name = "PX", default_value_t = 960)]
    pub width: u32,
    #[arg(long, value_name = "PX", default_value_t = 480)]
    pub height: u32,
    /// Output SVG file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Output directory (overrides `output_dir`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(cli.config.as_deref(), a),
        Command::FitOls(a) => commands::fit_ols_cmd(cli.config.as_deref(), a),
        Command::CheckModel(a) => commands::check_model_cmd(cli.config.as_deref(), a),
        Command::TrainMl(a) => commands::train_ml(cli.config.as_deref(), a),
        Command::MlEstimate(a) => commands::ml_estimate(cli.config.as_deref(), a),
        Command::Evaluate(a) => commands::evaluate(cli.config.as_deref(), a),
        Command::Simulate(a) => commands::simulate(cli.config.as_deref(), a),
        Command::Plot(a) => commands::plot(a),
        Command::Run(a) => commands::run(cli.config.as_deref(), a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(exit_code(&failure))
        }
    }
}

/// 1 usage, 2 data, 3 numeric.
fn exit_code(failure: &Failure) -> u8 {
    if failure.error.downcast_ref::<Usage>().is_some() {
        return 1;
    }
    match failure.error.downcast_ref::<taylor_core::Error>() {
        Some(e) if e.is_numeric() => 3,
        _ if failure.error.downcast_ref::<commands::CheckFailed>().is_some() => 3,
        _ => 2,
    }
}
