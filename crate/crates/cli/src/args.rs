use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "minphase",
    version,
    about = "Minimum-phase FIR design by Gramian factorization"
)]
pub struct Cli {
    /// Config file; defaults to `minphase.cfg` in the working directory if present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lift, factor and refine a linear-phase prototype.
    Design(DesignArgs),
    /// Minimum-phase equivalent of an arbitrary FIR.
    Transform(TransformArgs),
    /// Residual floor against lift offset.
    Sweep(SweepArgs),
    /// Eigenvalue sweep, zeros and amplitude response of a prototype.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Padding `Q` on each side of the Gramian.
    #[arg(long)]
    pub q: Option<usize>,
    /// Frequency grid size.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub prototype: PathBuf,
    /// Lift offset above γ_psd, or `auto`.
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// Use this γ_psd instead of measuring it.
    #[arg(long)]
    pub gamma_psd: Option<f64>,
    /// `unit-peak` or a fixed positive factor.
    #[arg(long)]
    pub scale: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub fir: PathBuf,
    /// Also run the MMSE feedforward baseline.
    #[arg(long)]
    pub mmse: bool,
    /// MMSE noise variance.
    #[arg(long, requires = "mmse")]
    pub sigma2: Option<f64>,
    /// MMSE feedforward length `P + 1`.
    #[arg(long, requires = "mmse")]
    pub plen: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub prototype: PathBuf,
    /// Comma-separated offsets, a file of offsets, or `logrange lo:hi:n`.
    #[arg(long, allow_hyphen_values = true)]
    pub offsets: String,
    #[arg(long)]
    pub gamma_psd: Option<f64>,
    #[arg(long)]
    pub scale: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub prototype: PathBuf,
    /// `Qlo:Qhi:n`, geometrically spaced.
    #[arg(long)]
    pub eig_sweep: Option<String>,
    #[arg(long)]
    pub zeros: bool,
    #[arg(long)]
    pub response: bool,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}
