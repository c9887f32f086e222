use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use onlinecs::harness::AsymptoticLaw;
use onlinecs::ChannelKind;

/// Online Bayesian compressed sensing: streaming recovery, state evolution and experiments.
#[derive(Debug, Parser)]
#[command(name = "onlinecs", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stream measurement records through one engine and write the estimate.
    Recover(RecoverArgs),
    /// Monte Carlo sweep over (N, alpha) from a JSON config.
    Sweep(ExperimentArgs),
    /// Online state-evolution curve (RK4).
    Evolve(EvolveArgs),
    /// Batch equation of state: both fixed-point branches per alpha.
    Offline(OfflineArgs),
    /// Fisher information of the measurement channel.
    Fisher(ModelArgs),
    /// Fit a large-alpha law to a theory or Monte Carlo curve.
    Fit(FitArgs),
    /// Sweep, theory overlay and N -> infinity extrapolation in one report.
    Compare(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Awgn,
    #[value(name = "one_bit", alias = "one-bit", alias = "1bit")]
    OneBit,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Awgn => ChannelKind::Awgn,
            ChannelArg::OneBit => ChannelKind::OneBit,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Fraction of nonzero components.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Variance of the nonzero components.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Measurement channel.
    #[arg(long, value_enum, default_value = "awgn")]
    pub channel: ChannelArg,
    /// Measurement noise variance.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Records, one per line: the N entries of phi followed by y. `-` reads stdin.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    /// Estimate as CSV `index,mean,variance`. `-` writes stdout.
    #[arg(long, default_value = "-")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Trials per N (overrides the config).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Base seed of the per-trial random streams.
    #[arg(long)]
    pub base_seed: Option<u64>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
    /// Comma-separated checkpoints.
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// RK4 step of the theory curve.
    #[arg(long)]
    pub ode_step: Option<f64>,
    /// Gauss-Hermite order for the channel integrals.
    #[arg(long)]
    pub quad_order: Option<usize>,
    /// Directory for the CSV and JSON outputs [default: current directory].
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Last alpha of the curve.
    #[arg(long)]
    pub alpha_max: f64,
    /// Spacing of the reported alpha grid.
    #[arg(long, default_value_t = 0.1)]
    pub output_interval: f64,
    /// Gauss-Hermite order for the channel integrals.
    #[arg(long, default_value_t = onlinecs::quadrature::DEFAULT_ORDER)]
    pub quad_order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// RK4 step in alpha.
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OfflineArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Instead of the curve, report the alpha bracket where the perfect-recovery
    /// branch appears (noiseless AWGN).
    #[arg(long)]
    pub scan_alpha_c: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    Power2,
    #[value(name = "exp_rate", alias = "exp-rate")]
    ExpRate,
    #[value(name = "inverse_alpha", alias = "inverse-alpha")]
    InverseAlpha,
}

impl From<LawArg> for AsymptoticLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::Power2 => AsymptoticLaw::Power2,
            LawArg::ExpRate => AsymptoticLaw::ExpRate,
            LawArg::InverseAlpha => AsymptoticLaw::InverseAlpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Online,
    Offline,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Asymptotic law: power2 (A/alpha^2), exp_rate (C e^(-r alpha)), inverse_alpha (B/alpha).
    #[arg(long, value_enum)]
    pub law: LawArg,
    /// Fit window `LO,HI` in alpha.
    #[arg(long, value_delimiter = ',', required = true)]
    pub window: Vec<f64>,
    /// CSV with `alpha` and `mse` (or `mse_mean`) columns; omitted, the theory
    /// curve is computed up to the window's upper edge.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Theory curve to fit, or the `method` rows to keep from a theory CSV.
    #[arg(long, value_enum, default_value = "online")]
    pub method: MethodArg,
    /// Alpha spacing of the computed theory curve.
    #[arg(long, default_value_t = 1.0)]
    pub output_interval: f64,
    /// RK4 step in alpha.
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
}
