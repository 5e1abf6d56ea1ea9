use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ldps", version, about = "Density-peak seeding, k estimation and clustering")]
pub struct Cli {
    /// Worker threads for parallel sections (falls back to LDPS_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic labeled point file.
    GenData(GenDataArgs),
    /// Estimate the number of clusters.
    EstimateK(EstimateArgs),
    /// Cluster a point file and write per-point assignments.
    Cluster(ClusterArgs),
    /// Compare density-peak seeding against random restarts.
    Benchmark(BenchmarkArgs),
    /// Simulate random seeding and compare with the closed-form repeat count.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1(TheoremArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// s1..s4, dim3/dim6/dim9/dim12, a0..a3 or rings.
    #[arg(long, conflicts_with_all = ["k", "m0", "sigma", "dim", "min_sep"])]
    pub preset: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m0: Option<usize>,
    /// Per-axis variance.
    #[arg(long, default_value_t = 0.002)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub min_sep: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dissim {
    Euclid,
    Sqeuclid,
    Manifold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelsArg {
    Auto,
    None,
    Last,
}

/// `start:stop:count`, inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:count, got '{s}'"));
        }
        let start: f64 = parts[0].parse().map_err(|_| format!("bad start '{}'", parts[0]))?;
        let stop: f64 = parts[1].parse().map_err(|_| format!("bad stop '{}'", parts[1]))?;
        let count: usize = parts[2].parse().map_err(|_| format!("bad count '{}'", parts[2]))?;
        if count == 0 {
            return Err("grid count must be >= 1".into());
        }
        if count == 1 && start != stop {
            return Err("a single-point grid needs start == stop".into());
        }
        Ok(GridSpec { start, stop, count })
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        ldps::peaks::linspace(self.start, self.stop, self.count)
    }
}

/// Input and dissimilarity options shared by the analysis commands.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Whitespace-separated point file, optional integer label in the last column.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = LabelsArg::Auto)]
    pub labels: LabelsArg,
    /// Skip min-max scaling of each attribute.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum, default_value_t = Dissim::Euclid)]
    pub dissim: Dissim,
    /// Neighbors per point for the manifold graph.
    #[arg(long, default_value_t = 8)]
    pub tnn: usize,
    /// Edge length in the manifold graph.
    #[arg(long, value_enum, default_value_t = EdgeWeightArg::Sqeuclid)]
    pub edge_weight: EdgeWeightArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdgeWeightArg {
    Euclid,
    Sqeuclid,
}

/// Peak-search parameters. A fixed `--h-bar/--r-bar` pair disables the grid search.
#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, requires = "r_bar")]
    pub h_bar: Option<f64>,
    #[arg(long, requires = "h_bar")]
    pub r_bar: Option<f64>,
    #[arg(long, default_value = "0.02:0.2:10")]
    pub grid_h: GridSpec,
    #[arg(long, default_value = "0.05:0.5:10")]
    pub grid_r: GridSpec,
    /// Exponent applied to the normalized density (1 or 0.25).
    #[arg(long, default_value_t = 1.0)]
    pub density_exp: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateMethod {
    Ldps,
    Cfsfdp,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum, default_value_t = EstimateMethod::Ldps)]
    pub method: EstimateMethod,
    /// Cutoff for the baseline, as the average neighbor fraction.
    #[arg(long, default_value_t = 0.02)]
    pub dc_fraction: f64,
    #[arg(long)]
    pub json: bool,
    /// Per-point densities, indices and scores as CSV.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
    /// Every grid cell as CSV.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClusterMethod {
    #[value(name = "ldps-means")]
    LdpsMeans,
    #[value(name = "ldps-medoids")]
    LdpsMedoids,
    Kmeans,
    #[value(name = "kmeans++")]
    KmeansPlusPlus,
    Kmedoids,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum)]
    pub method: ClusterMethod,
    /// Cluster count; estimated when omitted for the density-peak methods.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    pub outlier_threshold: f64,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    /// Assignments CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Cluster count; taken from the labels when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    /// Add wall-clock columns (makes output nondeterministic).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoremArgs {
    #[arg(long)]
    pub m0: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
