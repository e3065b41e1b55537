use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcspredict_core::{Criterion, Loading, ParamCount, PredictorKind, SampleMode};

#[derive(Debug, Parser)]
#[command(name = "mcspredict", version, about = "Next-MCS prediction experiments over per-user feedback traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scenario traces and write them as CSV.
    Simulate(SimulateArgs),
    /// Replay traces through every predictor and write metrics and CDFs.
    Run(RunArgs),
    /// Print the model state of one user at a given position.
    Inspect(InspectArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Generate a scenario with this loading.
    #[arg(long, value_name = "full|partial")]
    pub scenario: Option<Loading>,
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub seq_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-step fading correlation.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Fading branches averaged per link.
    #[arg(long)]
    pub diversity: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Trace CSV (`user_id,t,mcs`) to replay instead of a generated scenario.
    #[arg(long, conflicts_with = "scenario")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Frequency tree depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Largest candidate order.
    #[arg(long)]
    pub max_order: Option<usize>,
    /// Learning-curve threshold in bits.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_name = "mdl|aic|aicc")]
    pub criterion: Option<Criterion>,
    #[arg(long, value_name = "transitions|common-n")]
    pub sample_mode: Option<SampleMode>,
    #[arg(long, value_name = "chain|sequence")]
    pub param_count: Option<ParamCount>,
    /// Symbols between order re-selections.
    #[arg(long)]
    pub recompute: Option<usize>,
    /// Symbols before the first order selection.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub median_window: Option<usize>,
    #[arg(long)]
    pub fm_order: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated subset of vo_map,vo_brm,fm_map,fm_brm,median,no_prediction.
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<PredictorKind>>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Rate table CSV (`mcs,rate`).
    #[arg(long)]
    pub rates: Option<PathBuf>,
    #[arg(long, env = crate::config::OUTPUT_DIR_ENV)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Skip the per-step predictions.csv.
    #[arg(long)]
    pub no_prediction_log: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    /// TOML config; only its `[scenario]` table is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Destination trace CSV.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum TreeView {
    /// Active LeZi tree over the prefix.
    #[default]
    Lezi,
    /// The pipeline's fixed-depth tree.
    Ppm,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub user: String,
    /// Number of symbols to replay.
    #[arg(long)]
    pub upto: usize,
    #[arg(long, value_enum, default_value_t = TreeView::Lezi)]
    pub tree: TreeView,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long)]
    pub rates: Option<PathBuf>,
}
