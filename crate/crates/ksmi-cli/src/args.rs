//! Command-line definition. Flag-level range checks live here (clap exits
//! with code 2 on violation, naming the flag); data-dependent checks happen
//! at dispatch time and exit with code 1.

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "ksmi",
    about = "Sliced mutual information estimation between high-dimensional samples",
    version
)]
pub struct Cli {
    /// Worker threads for Monte Carlo loops (0 = one per CPU). Never changes
    /// numeric output, only wall-clock time.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic dataset and write it as paired CSV.
    Sample(SampleArgs),
    /// Estimate sliced MI from a paired CSV dataset.
    Estimate(EstimateArgs),
    /// Exact Gaussian oracle values: Monte Carlo sliced MI, the large-d
    /// asymptotic value, and the full mutual information.
    Gaussian(GaussianArgs),
    /// Evaluate the Monte Carlo error bound from operator norms.
    Bound(BoundArgs),
    /// Decompose an estimate into its Gaussian surrogate part plus residual.
    Residual(ResidualArgs),
    /// Independence-testing benchmark (AUC per grid cell).
    BenchIndependence(BenchIndependenceArgs),
    /// Dimension-decay sweep of the population sliced MI (exact oracle).
    BenchDimension(BenchDimensionArgs),
    /// Neural-estimator convergence sweep with n = m growing together.
    BenchNeural(BenchNeuralArgs),
    /// Check the projected-entropy Lipschitz inequality numerically.
    CheckLipschitz(CheckLipschitzArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// Shared low-rank Gaussian signal: X = P1 V + Z1, Y = P2 V + Z2.
    CommonSignal,
    /// Sigma_X = Sigma_Y = I_d with cross block corr * I_d.
    Isotropic,
    /// Non-Gaussian: Y encodes one sinusoidal feature of X.
    Sinusoidal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Inner {
    /// k-nearest-neighbor (KSG) estimator.
    Ksg,
    /// Donsker-Varadhan neural estimator.
    Neural,
}

/// Inner-estimator knobs shared by every estimating subcommand.
#[derive(Args, Debug, Clone)]
pub struct InnerArgs {
    /// Inner per-projection MI estimator.
    #[arg(long, value_enum, default_value_t = Inner::Ksg)]
    pub inner: Inner,

    /// KSG neighbor order.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_neighbors: u64,

    /// Hidden neurons of the neural critic.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub ell: u64,

    /// Training steps of the neural critic.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,

    /// Minibatch size of the neural critic.
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,

    /// Learning rate of the neural critic.
    #[arg(long, default_value_t = 5e-3)]
    pub learning_rate: f64,

    /// Project the critic onto the norm-constrained class after each step.
    #[arg(long, default_value_t = false)]
    pub constrain: bool,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    /// Ambient dimension d.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,

    /// Signal rank (common-signal family).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,

    /// Cross-correlation (isotropic family), |corr| < 1.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub corr: f64,

    /// Number of samples.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Output CSV path.
    #[arg(long)]
    pub output: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Input paired CSV (header x1..x{dx},y1..y{dy}).
    #[arg(long)]
    pub input: std::path::PathBuf,

    /// Projection dimension k.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    /// Number of projection pairs m.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,

    #[command(flatten)]
    pub inner: InnerArgs,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Report CSV path (prints to stdout when omitted).
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct GaussianArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,

    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,

    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub corr: f64,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    /// Monte Carlo frame pairs for the exact oracle.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,

    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dx: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub dy: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    #[arg(long)]
    pub sigma_x_op: f64,
    #[arg(long)]
    pub sigma_y_op: f64,
    #[arg(long)]
    pub fisher_op: f64,
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    #[arg(long)]
    pub input: std::path::PathBuf,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,

    #[command(flatten)]
    pub inner: InnerArgs,

    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BenchIndependenceArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,

    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub corr: f64,

    /// Comma-separated ambient dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d_grid: Vec<u64>,

    /// Comma-separated projection dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub k_grid: Vec<u64>,

    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_grid: Vec<u64>,

    /// Projections per estimate.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,

    /// Dependent trials (and independently, null trials) per cell.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[command(flatten)]
    pub inner: InnerArgs,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub output: Option<std::path::PathBuf>,

    /// Also write an SVG line plot of AUC versus n.
    #[arg(long)]
    pub plot: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchDimensionArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,

    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub corr: f64,

    #[arg(long, value_delimiter = ',', required = true)]
    pub d_grid: Vec<u64>,

    #[arg(long, value_delimiter = ',', required = true)]
    pub k_grid: Vec<u64>,

    /// Exact-oracle frame pairs per cell.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(2..))]
    pub m: u64,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub output: Option<std::path::PathBuf>,

    /// Also write an SVG line plot of the population value versus d.
    #[arg(long)]
    pub plot: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchNeuralArgs {
    #[arg(long, value_enum)]
    pub family: Family,

    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,

    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub corr: f64,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    /// Comma-separated n = m schedule.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_grid: Vec<u64>,

    #[command(flatten)]
    pub inner: InnerArgs,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub output: Option<std::path::PathBuf>,

    /// Also write an SVG line plot of estimate and truth versus n.
    #[arg(long)]
    pub plot: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckLipschitzArgs {
    /// Ambient dimension; the check runs on Sigma_X = diag(1..d).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub d: u64,

    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,

    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,

    #[arg(long)]
    pub seed: Option<u64>,
}
