//! Command-line arguments. Every argument record is also serializable: the
//! resolved records are echoed in each output document and `replay` reads
//! them back.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use weylsim::{ChamberSpec, Result, WeylType};

#[derive(Parser, Debug)]
#[command(name = "weylsim", version, about = "Brownian motion in truncated Weyl chambers")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Global {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Worker threads (default: one per core); results do not depend on it
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Seed for every random stream
    #[arg(long, env = "WEYLSIM_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    /// Target error bound for the deterministic routes; the energy cutoff or
    /// quadrature order is raised until the reported bound meets it
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Write the primary output here instead of stdout
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// List Dirichlet eigenvalues of the unit truncated chamber up to a cutoff
    Spectrum(SpectrumArgs),
    /// Survival probability by the eigenfunction series, Karlin–McGregor
    /// determinants, Monte Carlo, or all three with an agreement verdict
    Survival(SurvivalArgs),
    /// Predicted against observed survival along a growth regime
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo estimate of the soft-transition constant K_r
    Kr(KrArgs),
    /// Sample endpoint configurations from the h-ensemble (one row per sample)
    Ensemble(EnsembleArgs),
    /// Rate function of the empirical measures in a CSV file
    Rate(RateArgs),
    /// Distance of pooled empirical measures to the limit law
    Lln(LlnArgs),
    /// Endpoints of paths conditioned to survive
    Endpoints(EndpointsArgs),
    /// Extrapolate the normalising constant d_Z from exact partition functions
    Dz(DzArgs),
    /// Rerun a command from the config echoed in an earlier JSON output
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Survival(_) => "survival",
            Command::Asymptotics(_) => "asymptotics",
            Command::Kr(_) => "kr",
            Command::Ensemble(_) => "ensemble",
            Command::Rate(_) => "rate",
            Command::Lln(_) => "lln",
            Command::Endpoints(_) => "endpoints",
            Command::Dz(_) => "dz",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ChamberArgs {
    /// Weyl type: A, C or D
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    /// Dimension
    #[arg(long)]
    pub k: usize,
    /// Box scale: the chamber is truncated to r·(-π/2, π/2)^k
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
}

impl ChamberArgs {
    pub fn spec(&self) -> Result<ChamberSpec> {
        ChamberSpec::new(self.weyl_type, self.k, self.r)
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    #[arg(long)]
    pub k: usize,
    /// Largest eigenvalue listed
    #[arg(long)]
    pub cutoff: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteArg {
    Spectral,
    Kmgr,
    Mc,
    All,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Eigen,
    Image,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
pub struct McArgs {
    /// Monte Carlo paths (default 10^5)
    #[arg(long)]
    pub paths: Option<u64>,
    /// Time step (default min(10^-3, t/1000))
    #[arg(long)]
    pub dt: Option<f64>,
    /// Turn off the Brownian-bridge crossing correction
    #[arg(long)]
    pub no_bridge: bool,
    /// Use antithetic path pairs
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SurvivalArgs {
    #[command(flatten)]
    pub chamber: ChamberArgs,
    /// Time horizon
    #[arg(long)]
    pub t: f64,
    /// Starting point, comma-separated, in chamber order
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long, value_enum, default_value_t = RouteArg::Spectral)]
    pub method: RouteArg,
    /// Energy cutoff of the eigenfunction series (default λ₁ + max(20, 40r²/t))
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// One-dimensional kernel of the determinant route
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Terms of the one-dimensional kernel series
    #[arg(long)]
    pub truncation: Option<usize>,
    /// Gauss–Legendre order per coordinate for the determinant route
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeArg {
    ConstantR,
    Intermediate,
    Diffusive,
    Superdiffusive,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticsArgs {
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    /// Box size for the constant-r regime
    #[arg(long)]
    pub r: Option<f64>,
    /// Exponent of r(t) = t^β in the intermediate regime
    #[arg(long)]
    pub beta: Option<f64>,
    /// Constant of r(t) = c√t in the diffusive regime
    #[arg(long)]
    pub c: Option<f64>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KrArgs {
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 200_000)]
    pub paths: u64,
    /// Largest time step of the graded grid
    #[arg(long)]
    pub dt: Option<f64>,
    /// Starting scale near the chamber apex
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleArgs {
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    #[arg(long)]
    pub k: usize,
    /// Number of samples
    #[arg(long)]
    pub n: usize,
    /// Metropolis steps between retained samples (default k)
    #[arg(long)]
    pub steps: Option<u64>,
    /// Burn-in steps per chain (default 10k²)
    #[arg(long)]
    pub burnin: Option<u64>,
    /// Proposal standard deviation (default 0.5/k)
    #[arg(long)]
    pub proposal_scale: Option<f64>,
    /// Independent chains (default 8)
    #[arg(long)]
    pub chains: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RateArgs {
    /// CSV of empirical measures, one per row (as written by `ensemble`)
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
    /// Override the cached value of d_Z
    #[arg(long)]
    pub dz: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LlnArgs {
    /// Comma-separated CSV files of empirical measures
    #[arg(long, value_delimiter = ',', required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: WeylType,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EndpointsArgs {
    #[command(flatten)]
    pub chamber: ChamberArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    /// Number of endpoints wanted
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DzArgs {
    /// A or C (default: both)
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub weyl_type: Option<WeylType>,
    /// Comma-separated dimensions for the extrapolation
    #[arg(long, value_delimiter = ',')]
    pub k_list: Option<Vec<usize>>,
    /// Also write the estimates in the format of the bundled cache
    #[arg(long)]
    pub write_cache: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON output of an earlier run (or just its `config` object)
    pub file: PathBuf,
}
