use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Multivariate Matérn models: validity checks, correlation bounds,
/// simulation and constrained fitting.
///
/// Matrix arguments take either a CSV file (one row per line) or an inline
/// matrix such as `1,0.5;0.5,1`. A single inline number fills the whole
/// matrix (`--nu`) or a multiple of the identity (`--nugget`).
#[derive(Debug, Parser)]
#[command(name = "mvmatern", version, propagate_version = true)]
pub struct Cli {
    /// File of `key = value` lines using the long flag names with
    /// underscores; flags given on the command line take precedence [path]
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel bound and oracle sweeps, 0 for all cores
    /// [count]
    #[arg(long, global = true, env = "MVMATERN_THREADS", default_value_t = 0, value_name = "N")]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate condition sets on a parameter set; exit 1 when any requested
    /// set is not satisfied
    Check(CheckArgs),
    /// Largest collocated correlation under condition sets
    Bound(BoundArgs),
    /// Covariance or spectral density curves of a model
    Curves(CurvesArgs),
    /// Empirical direct and cross variograms of a dataset
    Vario(VarioArgs),
    /// Weighted least-squares exponential fit to the empirical variograms
    Fit(FitArgs),
    /// Constrained adaptive Metropolis sampling of the exponential model
    Mcmc(McmcArgs),
    /// Deviance information criterion of a stored chain
    Dic(DicArgs),
    /// Draw one realization of a Gaussian field at random sites
    Simulate(SimulateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Bound(_) => "bound",
            Command::Curves(_) => "curves",
            Command::Vario(_) => "vario",
            Command::Fit(_) => "fit",
            Command::Mcmc(_) => "mcmc",
            Command::Dic(_) => "dic",
            Command::Simulate(_) => "simulate",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    /// Comma-separated condition set ids, or `all` [id]
    #[arg(long, default_value = "all")]
    pub set: String,
    /// Scale matrix α, entries > 0 [1/distance]
    #[arg(long, value_name = "MATRIX")]
    pub alpha: Option<String>,
    /// Smoothness matrix ν, entries > 0 [dimensionless]
    #[arg(long, value_name = "MATRIX", default_value = "0.5")]
    pub nu: String,
    /// Collocated covariance matrix σ [variance]
    #[arg(long, value_name = "MATRIX")]
    pub sigma: Option<String>,
    /// Spatial dimension [count]
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Relative eigenvalue tolerance of every PSD / CND test [dimensionless]
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Hyperparameter β of thm3B; searched when omitted [1/distance²]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Hyperparameter matrix ψ of thm2B; searched when omitted [distance²]
    #[arg(long, value_name = "MATRIX")]
    pub psi: Option<String>,
    /// δ of the apanasovich set; recovered from ν when omitted together with
    /// --apan-a [dimensionless]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Matrix a of the apanasovich set [dimensionless]
    #[arg(long, value_name = "MATRIX")]
    pub apan_a: Option<String>,
    /// Smallest nonzero frequency of the spectral oracle [1/distance]
    #[arg(long, default_value_t = 1e-3)]
    pub omega_min: f64,
    /// Largest frequency of the spectral oracle [1/distance]
    #[arg(long, default_value_t = 1e3)]
    pub omega_max: f64,
    /// Log-spaced frequencies of the spectral oracle [count]
    #[arg(long, default_value_t = 400)]
    pub omega_points: usize,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Built-in parameter family: `fig1` (scaled ranges, abscissa β) or
    /// `fig2` (logarithmic cross range, abscissa a); omit to use --alpha and
    /// --nu [id]
    #[arg(long)]
    pub example: Option<String>,
    /// Cross-range shift a of the fig1 family [1/distance²]
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Abscissa grid `lo:hi:n`; defaults to 0.1:10:50 (fig1) and 0.01:10:30
    /// (fig2) [family units]
    #[arg(long)]
    pub grid: Option<String>,
    /// Grid spacing `lin` or `log`; defaults to lin (fig1) and log (fig2)
    /// [id]
    #[arg(long)]
    pub spacing: Option<String>,
    /// Comma-separated condition set ids, or `all`, without --example [id]
    #[arg(long, default_value = "all")]
    pub set: String,
    /// Scale matrix α without --example [1/distance]
    #[arg(long, value_name = "MATRIX")]
    pub alpha: Option<String>,
    /// Smoothness matrix ν without --example [dimensionless]
    #[arg(long, value_name = "MATRIX", default_value = "0.5")]
    pub nu: String,
    /// Number of components of the built-in families [count]
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Spatial dimension [count]
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Absolute tolerance of the bisection in ρ [dimensionless]
    #[arg(long, default_value_t = 1e-4)]
    pub rho_tol: f64,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvesArgs {
    /// Scale matrix α [1/distance]
    #[arg(long, value_name = "MATRIX")]
    pub alpha: Option<String>,
    /// Smoothness matrix ν [dimensionless]
    #[arg(long, value_name = "MATRIX", default_value = "0.5")]
    pub nu: String,
    /// Collocated covariance matrix σ [variance]
    #[arg(long, value_name = "MATRIX")]
    pub sigma: Option<String>,
    /// Spatial dimension, used by the spectral density [count]
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Emit spectral densities against frequency instead of covariances
    /// against lag [flag]
    #[arg(long)]
    pub spectral: bool,
    /// Largest lag, or largest frequency with --spectral [distance or
    /// 1/distance]
    #[arg(long, default_value_t = 5.0)]
    pub max: f64,
    /// Equispaced abscissae from 0 to --max [count]
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VarioArgs {
    /// Dataset CSV `x,y[,z],<variables>`, `-` for standard input [path]
    #[arg(long, default_value = "-")]
    pub data: PathBuf,
    /// Equal-width lag bins [count]
    #[arg(long, default_value_t = 15)]
    pub bins: usize,
    /// Largest lag; half the largest site distance when omitted [distance]
    #[arg(long)]
    pub max_lag: Option<f64>,
    /// Replace every variable by its normal scores first [flag]
    #[arg(long)]
    pub normal_scores: bool,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Dataset CSV `x,y[,z],<variables>`, `-` for standard input [path]
    #[arg(long, default_value = "-")]
    pub data: PathBuf,
    /// Equal-width lag bins [count]
    #[arg(long, default_value_t = 15)]
    pub bins: usize,
    /// Largest lag; half the largest site distance when omitted [distance]
    #[arg(long)]
    pub max_lag: Option<f64>,
    /// Replace every variable by its normal scores first [flag]
    #[arg(long)]
    pub normal_scores: bool,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct McmcArgs {
    /// Dataset CSV `x,y[,z],<variables>`, `-` for standard input [path]
    #[arg(long, default_value = "-")]
    pub data: PathBuf,
    /// Starting parameters `matrix,i,j,value` as written by `fit`; projected
    /// onto the constraint set when they violate it [path]
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Constraint set id [id]
    #[arg(long, default_value = "ex1")]
    pub set: String,
    /// How α is sampled: `auto`, `free`, `constant` or `fixed` (held at the
    /// initial value); `auto` is constant for gneiting, ex2 and du [id]
    #[arg(long, default_value = "auto")]
    pub alpha_mode: String,
    /// Total iterations [count]
    #[arg(long, default_value_t = 60_000)]
    pub iters: usize,
    /// Burn-in iterations, not stored [count]
    #[arg(long, default_value_t = 30_000)]
    pub burn: usize,
    /// Random seed of the chain and of the projection [integer]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace every variable by its normal scores first [flag]
    #[arg(long)]
    pub normal_scores: bool,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DicArgs {
    /// Dataset CSV the chain was fitted to, `-` for standard input [path]
    #[arg(long, default_value = "-")]
    pub data: PathBuf,
    /// Chain CSV written by `mcmc` [path]
    #[arg(long)]
    pub chain: Option<PathBuf>,
    /// Starting parameters of the chain; needed for `fixed` α [path]
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Constraint set id used by the chain [id]
    #[arg(long, default_value = "ex1")]
    pub set: String,
    /// α mode used by the chain [id]
    #[arg(long, default_value = "auto")]
    pub alpha_mode: String,
    /// Replace every variable by its normal scores first [flag]
    #[arg(long)]
    pub normal_scores: bool,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Scale matrix α [1/distance]
    #[arg(long, value_name = "MATRIX")]
    pub alpha: Option<String>,
    /// Smoothness matrix ν [dimensionless]
    #[arg(long, value_name = "MATRIX", default_value = "0.5")]
    pub nu: String,
    /// Collocated covariance matrix σ [variance]
    #[arg(long, value_name = "MATRIX")]
    pub sigma: Option<String>,
    /// Nugget matrix V [variance]
    #[arg(long, value_name = "MATRIX", default_value = "0")]
    pub nugget: String,
    /// Number of sites, uniform on the cube [0, domain]^d [count]
    #[arg(long, default_value_t = 200)]
    pub sites: usize,
    /// Spatial dimension [count]
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Side length of the sampling cube [distance]
    #[arg(long, default_value_t = 10.0)]
    pub domain: f64,
    /// Random seed of the sites and the field [integer]
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file, standard output when omitted [path]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
