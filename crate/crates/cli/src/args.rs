//! Command-line flags. Every subcommand struct doubles as the schema of its
//! `--config` file: keys are the long flag names (`batch-size = 128`).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mmflaw::arch::{ArchConfig, ArchKind, Lambda};
use mmflaw::experiments::{ReportFormat, SweepKind};
use mmflaw::nn::InitScheme;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "mmflaw",
    version,
    about = "Multimodal flaw prediction from paired source and binary features",
    after_help = "Exit status: 0 success, 1 invalid input or usage, 2 runtime or numerical failure."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a graph JSON corpus into a source-feature CSV
    Featurize(FeaturizeArgs),
    /// Generate a synthetic two-view dataset
    Synth(SynthArgs),
    /// Train one model on one fold
    Train(TrainArgs),
    /// Five-fold cross-validation of one configuration
    Cv(CvArgs),
    /// Run an ablation grid, each cell a five-fold run
    Sweep(SweepArgs),
    /// Render a saved report.json as CSV or markdown
    Report(ReportArgs),
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// TOML or JSON file with default values for any flag
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Worker threads for folds, sweep cells and featurization
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FeaturizeArgs {
    /// Graph corpus JSON
    #[arg(value_name = "GRAPHS")]
    pub input: Option<PathBuf>,

    /// Feature CSV to write
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SynthArgs {
    /// Number of instances [default: 5000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Latent dimension k [default: 8]
    #[arg(long)]
    pub latent_dim: Option<usize>,
    /// Source view width [default: 40]
    #[arg(long)]
    pub dim_x: Option<usize>,
    /// Binary view width [default: 30]
    #[arg(long)]
    pub dim_y: Option<usize>,
    /// Noise std of the source view [default: 0.5]
    #[arg(long)]
    pub noise_x: Option<f64>,
    /// Noise std of the binary view [default: 3.0]
    #[arg(long)]
    pub noise_y: Option<f64>,
    /// [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Dataset CSV to write
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

/// Model and training flags of `train`, `cv` and `sweep`.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelArgs {
    /// corrnet, jae, bidnn or baseline [default: corrnet]
    #[arg(long)]
    pub arch: Option<ArchKind>,
    /// Nodes per layer [default: 50]
    #[arg(long)]
    pub width: Option<usize>,
    /// Layers per block [default: 1]
    #[arg(long)]
    pub depth: Option<usize>,
    /// CorrNet correlation weight, a number or `auto` [default: 0.1]
    #[arg(long)]
    pub lambda: Option<Lambda>,
    /// constant[:c], kaiming, xavier or lsuv [default: kaiming]
    #[arg(long)]
    pub init: Option<InitScheme>,
    /// [default: 100]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// [default: 256]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Base seed for the fold plan and training [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset CSV (id, label, src_*, bin_* columns)
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Add single-modality copies of the training rows
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub augment: Option<bool>,
}

impl ModelArgs {
    pub fn arch_config(&self, dim_x: usize, dim_y: usize) -> ArchConfig {
        let mut c = ArchConfig::new(self.arch.unwrap_or(ArchKind::CorrNet), dim_x, dim_y);
        c.layer_width = self.width.unwrap_or(c.layer_width);
        c.layer_depth = self.depth.unwrap_or(c.layer_depth);
        c.lambda = self.lambda.unwrap_or(c.lambda);
        c.init = self.init.unwrap_or(c.init);
        c.epochs = self.epochs.unwrap_or(c.epochs);
        c.lr = self.lr.unwrap_or(c.lr);
        c.batch_size = self.batch_size.unwrap_or(c.batch_size);
        c.seed = self.seed.unwrap_or(c.seed);
        c
    }

    /// Every field filled in from the config actually run.
    pub fn resolved(&self, cfg: &ArchConfig) -> ModelArgs {
        ModelArgs {
            arch: Some(cfg.kind),
            width: Some(cfg.layer_width),
            depth: Some(cfg.layer_depth),
            lambda: Some(cfg.lambda),
            init: Some(cfg.init),
            epochs: Some(cfg.epochs),
            lr: Some(cfg.lr),
            batch_size: Some(cfg.batch_size),
            seed: Some(cfg.seed),
            data: self.data.clone(),
            augment: Some(self.augment.unwrap_or(false)),
        }
    }
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Which of the five folds to train on, 0 to 4 [default: 0]
    #[arg(long)]
    pub fold: Option<usize>,

    /// Output directory
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CvArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Output directory
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    /// size, init, lambda or singlemulti
    #[arg(long)]
    pub kind: Option<SweepKind>,

    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,

    /// Output directory
    #[arg(short, long, value_name = "DIR")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReportArgs {
    /// report.json, or a directory containing one
    #[arg(value_name = "REPORT")]
    pub input: Option<PathBuf>,

    /// csv or markdown [default: markdown]
    #[arg(long)]
    pub format: Option<ReportFormat>,

    /// File to write instead of standard output
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
