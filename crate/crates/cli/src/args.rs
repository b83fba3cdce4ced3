use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "monosim",
    version,
    about = "Monotone single-index modal regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to a CSV file; writes fit.json and curve.csv.
    Fit(FitArgs),
    /// Index values and predicted modes for new rows; writes predictions.csv.
    Predict(PredictArgs),
    /// Parametric bootstrap; writes bootstrap.json, ci.csv and (index models) band.csv.
    Bootstrap(BootstrapArgs),
    /// K-fold cross-validation; writes cv.csv.
    Cv(CvArgs),
    /// Residual histogram against the fitted error density; writes diagnostic.csv/json.
    Diagnose(DiagnoseArgs),
    /// Error-family recommendation from bootstrap intervals; writes selection.json.
    Select(SelectArgs),
    /// Simulate a scheme dataset; writes data.csv and truth.csv.
    Simulate(SimulateArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with default values for any option; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress progress and summaries on stderr.
    #[arg(long)]
    pub quiet: bool,
    /// Worker threads for parallel replicates and folds.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Data and training options.
#[derive(Debug, Args, Clone, Default)]
pub struct Training {
    /// Model tag, e.g. st-gx-d, sn-gx-b, n-fx, t-gx-d.
    #[arg(long)]
    pub model: Option<String>,
    /// Input CSV (comma separated, header row).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response column.
    #[arg(long)]
    pub response: Option<String>,
    /// Covariate columns, comma separated (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Numeric covariates to centre and scale, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub standardize: Option<Vec<String>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub train: Training,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Fit artifact produced by `fit`.
    #[arg(long, conflicts_with = "coefficients")]
    pub fit: Option<PathBuf>,
    /// Index equation JSON (`{"terms": [...]}`); emits the index only.
    #[arg(long)]
    pub coefficients: Option<PathBuf>,
    /// CSV with the rows to score.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Start from an existing fit instead of fitting in-process.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[command(flatten)]
    pub train: Training,
    /// Number of bootstrap replicates.
    #[arg(long = "bootstrap-B")]
    pub bootstrap_b: Option<usize>,
    /// chained or classic.
    #[arg(long = "bootstrap-mode")]
    pub bootstrap_mode: Option<String>,
    /// Confidence level of the intervals and bands.
    #[arg(long)]
    pub level: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub train: Training,
    #[arg(long)]
    pub folds: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub fit: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Bootstrap artifact produced by `bootstrap`.
    #[arg(long, conflicts_with = "ci")]
    pub bootstrap: Option<PathBuf>,
    /// Interval table with columns parameter, estimate, lower5, upper95 and rows w, delta.
    #[arg(long)]
    pub ci: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scheme id: 1, 2, 3 or 4.
    #[arg(long)]
    pub scheme: Option<u32>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}
