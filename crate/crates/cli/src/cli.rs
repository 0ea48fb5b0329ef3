use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "vcdim", version, about = "Bootstrap VC-dimension estimates and model selection for linear regression")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log more (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a Gaussian linear-model dataset.
    Simulate(SimulateArgs),
    /// Estimate the xi curve of one model.
    Xi(XiArgs),
    /// Fit the bound curve to a xi curve file.
    Fit(FitArgs),
    /// Score every model of a nested list.
    Select(SelectArgs),
    /// Repeat simulate + select over many seeds and tally each criterion.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Clone)]
pub struct GeneratorArgs {
    /// Number of covariates with nonzero coefficients.
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub n: usize,
    /// Extra covariates with zero coefficients.
    #[arg(long, default_value_t = 0)]
    pub decoys: usize,
    #[arg(long, default_value_t = 0.4)]
    pub sigma_eps: f64,
    #[arg(long, default_value_t = 5.0)]
    pub mu_beta: f64,
    #[arg(long, default_value_t = 3.0)]
    pub sigma_beta: f64,
    #[arg(long, default_value_t = 5.0)]
    pub mu_x: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma_x: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    /// Decreasing |corr(x, y)|.
    Correlation,
    /// As listed by --columns, or file order.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Local,
    Global,
}

/// Where the data comes from and how it is prepared.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Column of block labels; turns on stratified resampling.
    #[arg(long)]
    pub block_column: Option<String>,
    /// Comma-separated covariates (default: every other column).
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    /// Centre and scale every variable first.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub standardize: bool,
    /// Whiten the covariates after standardizing.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub sphere: bool,
}

/// Resampling and fitting settings. Each flag overrides the --config file.
#[derive(Debug, Args, Clone, Default)]
pub struct AnalysisArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated subsample sizes.
    #[arg(long, value_delimiter = ',')]
    pub design_points: Option<Vec<usize>>,
    /// Number of loss intervals.
    #[arg(long)]
    pub m: Option<usize>,
    /// Use this loss bound instead of the per-replicate maximum.
    #[arg(long)]
    pub fixed_bound: Option<f64>,
    #[arg(long)]
    pub b1: Option<usize>,
    #[arg(long)]
    pub b2: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_step: Option<f64>,
    #[arg(long)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    /// Accept the smallest model with |q - d_hat| <= t (0 uses --rule).
    #[arg(long)]
    pub t: Option<f64>,
}

#[derive(Debug, Args)]
pub struct XiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// TSV written by `vcdim xi`.
    #[arg(long)]
    pub curve: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Also write the per-c profile.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = Order::Correlation)]
    pub order: Order,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub gen: GeneratorArgs,
    /// Number of simulated datasets.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, value_enum, default_value_t = Order::File)]
    pub order: Order,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long)]
    pub out: PathBuf,
}
