//! Command-line configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dkw_core::binom::NoCancelDirection;
use dkw_core::experiments::{DeltaRule, TargetRule};
use dkw_core::{BandKind, DistributionModel};
use serde::Serialize;

/// Variance-dependent DKW confidence bands and the experiments behind them.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "dkw", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Master seed of every simulation.
    #[arg(long, global = true, env = "DKW_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Monte Carlo trials (per cell or per point); each command has its own default.
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for simulations. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Band around the empirical CDF of a sample file.
    Band(BandArgs),
    /// Band half-width over a grid of F-values, for plotting.
    Envelope(EnvelopeArgs),
    /// Monte Carlo violation rate of a band.
    Coverage(CoverageArgs),
    /// Doubling sweep for the constants (c0, c1).
    Calibrate(CalibrateArgs),
    /// Mean of the Z_m statistic against m.
    Zm(ZmArgs),
    /// Mean prefix-sum maximum against r, with its ratio to sqrt(ln ln r).
    Lil(LilArgs),
    /// Exact binomial checks of the fixed-t statements.
    Oracle(OracleArgs),
    /// Probability surface of the geometric block event.
    Blocks(BlocksArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Band(_) => "band",
            Self::Envelope(_) => "envelope",
            Self::Coverage(_) => "coverage",
            Self::Calibrate(_) => "calibrate",
            Self::Zm(_) => "zm",
            Self::Lil(_) => "lil",
            Self::Oracle(_) => "oracle",
            Self::Blocks(_) => "blocks",
        }
    }

    /// Trials used when `--trials` is absent; `None` for exact commands.
    pub fn default_trials(&self) -> Option<u64> {
        match self {
            Self::Coverage(_) | Self::Blocks(_) => Some(10_000),
            Self::Calibrate(_) => Some(100_000),
            Self::Zm(_) => Some(2_000),
            Self::Lil(_) => Some(4_000),
            Self::Band(_) | Self::Envelope(_) | Self::Oracle(_) => None,
        }
    }
}

fn parse_kind(s: &str) -> Result<BandKind, String> {
    s.parse().map_err(|e: dkw_core::Error| e.to_string())
}

fn parse_model(s: &str) -> Result<DistributionModel, String> {
    s.parse().map_err(|e: dkw_core::Error| e.to_string())
}

/// Band parameter: delta directly or through a failure probability.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct DeltaArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    /// Failure probability, inverted with 2 exp(-c1 delta m).
    #[arg(long)]
    pub failure_prob: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstantArgs {
    /// JSON constant set; the bundled calibrated set when absent.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Accept deltas below the c0 ln ln m / m floor.
    #[arg(long)]
    pub no_floor: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BandArgs {
    /// Sample file, one value per line.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_kind, default_value = "variance")]
    pub kind: BandKind,
    #[command(flatten)]
    #[serde(flatten)]
    pub delta: DeltaArgs,
    /// Evaluate widths at F(t) of this model instead of at F_m(t).
    #[arg(long, value_parser = parse_model)]
    pub model: Option<DistributionModel>,
    #[command(flatten)]
    #[serde(flatten)]
    pub consts: ConstantArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnvelopeArgs {
    #[arg(long, value_parser = parse_kind, default_value = "variance")]
    pub kind: BandKind,
    #[arg(long)]
    pub m: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub delta: DeltaArgs,
    /// Grid intervals on [0, 1].
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub consts: ConstantArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoverageArgs {
    #[arg(long, value_parser = parse_kind, default_value = "classical")]
    pub kind: BandKind,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_parser = parse_model, default_value = "uniform")]
    pub model: DistributionModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetArg {
    ExpDecay,
    Vacuous,
}

impl From<TargetArg> for TargetRule {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::ExpDecay => TargetRule::ExpDecay,
            TargetArg::Vacuous => TargetRule::Vacuous,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long, value_parser = parse_kind, default_value = "variance")]
    pub kind: BandKind,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub m_grid: Vec<u64>,
    #[arg(long, value_enum, default_value_t = TargetArg::ExpDecay)]
    pub target: TargetArg,
    /// Also write the calibrated constant set as JSON.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    /// delta = c / m
    FixedOverM,
    /// delta = c ln ln m / m
    Loglog,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ZmArgs {
    #[arg(long, value_delimiter = ',', default_value = "1024,16384,262144")]
    pub m_grid: Vec<u64>,
    #[arg(long, value_enum, default_value_t = RuleArg::FixedOverM)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 4.0)]
    pub c: f64,
}

impl ZmArgs {
    pub fn delta_rule(&self) -> DeltaRule {
        match self.rule {
            RuleArg::FixedOverM => DeltaRule::FixedOverM(self.c),
            RuleArg::Loglog => DeltaRule::LogLog(self.c),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LilArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,1024,4096,16384,65536,262144,1048576,4194304")]
    pub r_grid: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckArg {
    /// Fixed-t lower bound where sigma^2 >= delta.
    Prop14,
    /// Small-variance envelope, upper direction.
    Thm51,
    /// Small-variance envelope, lower direction.
    Prop52,
    /// Exact two-sided tail against the Bennett bound.
    Bennett,
}

impl CheckArg {
    pub fn direction(self) -> Option<NoCancelDirection> {
        match self {
            Self::Thm51 => Some(NoCancelDirection::UpperThm51),
            Self::Prop52 => Some(NoCancelDirection::LowerProp52),
            Self::Prop14 | Self::Bennett => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub check: CheckArg,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Deviation for the Bennett check.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.5)]
    pub c2: f64,
    /// Smallest delta m accepted by the fixed-t check.
    #[arg(long, default_value_t = 8.0)]
    pub min_delta_m: f64,
    /// Sweep the probe constants over a grid instead of one check.
    #[arg(long)]
    pub sweep: bool,
    /// Sweep grid of m (fixed-t and Bennett checks).
    #[arg(long, value_delimiter = ',')]
    pub m_grid: Option<Vec<u64>>,
    /// Sweep grid of delta m (fixed-t check).
    #[arg(long, value_delimiter = ',', default_value = "8,32,128")]
    pub delta_m_grid: Vec<f64>,
    /// Sweep grid of p.
    #[arg(long, value_delimiter = ',')]
    pub p_grid: Option<Vec<f64>>,
    /// Sweep grid of eps (Bennett check).
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2,0.3,0.4,0.5")]
    pub eps_grid: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BlocksArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    pub xi: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub eta: Vec<u32>,
    #[arg(long, default_value_t = 4)]
    pub s0: u32,
}
