use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hyperband", version, about = "Mutual-information band selection for hyperspectral cubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mutual information of every band with the ground truth.
    Profile(ProfileArgs),
    /// Run one band selector and write its trace.
    Select(SelectArgs),
    /// Train on a stratified half and report accuracy for a band subset.
    Evaluate(EvaluateArgs),
    /// Accuracy as a function of the number of selected bands.
    Sweep(SweepArgs),
    /// Generate a synthetic cube with known band roles.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Cube header (JSON) with a raw u16le payload beside it.
    #[arg(long)]
    pub cube: PathBuf,
    /// Ground-truth label grid (CSV, 0 = unlabeled).
    #[arg(long)]
    pub gt: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantArg {
    PerBand,
    Global,
}

#[derive(Debug, Args)]
pub struct QuantArgs {
    /// Histogram bins per band.
    #[arg(long, default_value_t = 256)]
    pub bins: usize,
    /// Min-max range per band or shared across the cube.
    #[arg(long, value_enum, default_value_t = QuantArg::PerBand)]
    pub quant: QuantArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Svm,
    Knn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    #[arg(long, value_enum, default_value_t = ClassifierArg::Svm)]
    pub classifier: ClassifierArg,
    /// SVM penalty [default: 100].
    #[arg(long, allow_negative_numbers = true)]
    pub svm_c: Option<f64>,
    /// RBF width [default: 1 / number of bands].
    #[arg(long, allow_negative_numbers = true)]
    pub svm_gamma: Option<f64>,
    /// SVM kernel [default: rbf].
    #[arg(long, value_enum)]
    pub svm_kernel: Option<KernelArg>,
    /// Neighbors for the kNN classifier [default: 5].
    #[arg(long)]
    pub neighbors: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub quant: QuantArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub quant: QuantArgs,
    /// ig, mi_th or jmi.
    #[arg(long)]
    pub selector: String,
    /// Number of bands to select.
    #[arg(long)]
    pub k: usize,
    /// Minimum MI gain for mi_th.
    #[arg(long, allow_negative_numbers = true)]
    pub th: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated band indices.
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<usize>>,
    /// Selection trace CSV whose accepted bands are used.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub quant: QuantArgs,
    #[arg(long)]
    pub selector: String,
    /// Ascending, comma-separated band counts.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80")]
    pub ks: Vec<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub th: Option<f64>,
    /// Band count whose classification map is written [default: largest k].
    #[arg(long)]
    pub map_k: Option<usize>,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Duplicate,
    Redundancy,
    Xor,
    Mixed,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetArg>,
    /// JSON spec file; its seed is replaced by --seed.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Image rows for the mixed preset [default: 100].
    #[arg(long)]
    pub rows: Option<usize>,
    /// Image columns for the mixed preset [default: 100].
    #[arg(long)]
    pub cols: Option<usize>,
    /// Classes for the mixed preset [default: 4].
    #[arg(long)]
    pub classes: Option<u16>,
    /// Bands for the mixed preset [default: 30].
    #[arg(long)]
    pub n_bands: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}
