use clap::{Parser, Subcommand, ValueEnum};

/// Scattering quantum walks on finite graphs: constructions, spectra,
/// evolutions, trajectory sampling, and verification suites.
#[derive(Debug, Parser)]
#[command(name = "sqw", version, disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the walk operator and report its unitarity residual.
    Build(BuildArgs),
    /// Eigenvalues of U_S and of the bistochastic matrix Phi^Diag.
    Spectrum(SpectrumArgs),
    /// Unitary evolution: vertex probabilities Q_n over time.
    Evolve(EvolveArgs),
    /// Open edge-channel evolution: Q_n under Phi^n.
    OpenEvolve(EvolveArgs),
    /// Induced vertex-channel evolution: Q_n = r0 P^n.
    Induced(InducedArgs),
    /// Sample quantum trajectories of the measure-then-evolve protocol.
    Trajectories(TrajectoriesArgs),
    /// Asymptotic state and vertex law of the edge or induced channel.
    Asymptotics(AsymptoticsArgs),
    /// Run a named verification suite; exits 0 on pass, 2 on failure.
    Verify(VerifyArgs),
}

#[derive(Debug, clap::Args)]
pub struct GraphFamilyArgs {
    /// Graph: a JSON file path or shorthand (t3, path:N, cycle:N, star:N,
    /// complete:N, torus:LxL, random:N).
    #[arg(long)]
    pub graph: String,
    /// Family: a JSON file path or shorthand (identity, dft, grover:ALPHA,
    /// haar:SEED, hadamard-center, swap-center).
    #[arg(long)]
    pub family: String,
    /// Seed for `random` graph shorthand.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, clap::Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    /// Include the full matrix in the output.
    #[arg(long)]
    pub matrix: bool,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    #[arg(long)]
    pub steps: usize,
    /// Initial basis edge index.
    #[arg(long, default_value_t = 0)]
    pub initial_edge: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct InducedArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    #[arg(long)]
    pub steps: usize,
    /// Initial basis vertex.
    #[arg(long, default_value_t = 0)]
    pub initial_vertex: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct TrajectoriesArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub count: usize,
    /// Root seed; per-trajectory substreams are derived by counter.
    #[arg(long = "traj-seed", default_value_t = 0)]
    pub traj_seed: u64,
    #[arg(long, default_value_t = 0)]
    pub initial_edge: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub input: GraphFamilyArgs,
    #[arg(long, value_enum, default_value_t = Channel::Edge)]
    pub channel: Channel,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// unitarity | spectral-mapping | channel | induced | all
    #[arg(long)]
    pub suite: String,
    /// Graph source for randomized suites.
    #[arg(long, default_value = "random")]
    pub graph: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Grover parameter for the spectral-mapping suite.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub alpha: f64,
    /// Number of randomized instances per suite.
    #[arg(long, default_value_t = 20)]
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Channel {
    Edge,
    Induced,
}
