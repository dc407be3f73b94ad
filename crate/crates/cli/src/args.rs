use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bmclab", version, about = "Transience and recurrence of branching random walks in random environment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the criterion value c and the transient/recurrent verdict.
    Classify(ClassifyArgs),
    /// Windowed spectral radii of a sampled realization along a schedule.
    Spectral(SpectralArgs),
    /// Monte Carlo: frozen-origin runs and return counts.
    Simulate(SimulateArgs),
    /// Critical birth rate of the continuous-time branching walk on a graph.
    Ctbrw(CtbrwArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Gradient tolerance of the inner minimization.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Width of the band around c = 1 that raises boundary_flag.
    #[arg(long, default_value_t = 1e-6)]
    pub boundary_tol: f64,
    #[command(flatten)]
    pub output: Output,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SpectralArgs {
    #[arg(long)]
    pub spec: PathBuf,
    /// Strictly increasing window half-widths, e.g. 10,50,200.
    #[arg(long, value_delimiter = ',', required = true)]
    pub schedule: Vec<i64>,
    /// Seed of the environment realization.
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: Output,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub replicas: usize,
    /// Generations per run.
    #[arg(long)]
    pub horizon: u32,
    /// Population at which a run stops and is flagged.
    #[arg(long, default_value_t = 1_000_000_000_000)]
    pub cap: u64,
    /// Seed of both the environment and the replica streams.
    #[arg(long)]
    pub seed: u64,
    /// Half-width of the simulation box; defaults to horizon times the
    /// longest step plus one, which no particle can leave.
    #[arg(long = "box")]
    pub box_half_width: Option<i64>,
    /// Also write the per-replica CSV here.
    #[arg(long)]
    pub runs: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
    /// `json`: summary report; `csv`: per-replica rows.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CtbrwArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub output: Output,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
