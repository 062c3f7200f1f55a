mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wpshms::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Exact weighted Morse homotopy categories of weighted projective spaces.
#[derive(Debug, Parser)]
#[command(name = "wpshms", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weights, stacky vectors and chart polytopes.
    Info(Common),
    /// Objects, morphism generators and exact product weights.
    Category(Common),
    /// Run verification suites; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Integrate a gradient trajectory or assemble a gradient tree.
    Flow(FlowArgs),
    /// Plot the polytope, generators, trees or section graphs.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Comma-separated positive weights with gcd 1, e.g. 3,2
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub weights: Vec<i64>,
    /// Label of the first object of the collection
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub base: i64,
    /// Affine chart used for coordinates
    #[arg(long, default_value_t = 0)]
    pub chart: usize,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// dims, exceptional, assoc, functor, ratio, charts, flow, or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Grid resolution for the max-modulus scan
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed for random rational sample points
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// RK4 step for the flow suite
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: Common,
    /// Trajectory of f_ab for the pair A,B
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "tree")]
    pub pair: Vec<i64>,
    /// Gradient tree for the triple A,B,C
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tree: Vec<i64>,
    /// K of the (first) generator
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<i64>,
    /// K of the second generator of a tree
    #[arg(long, value_delimiter = ',')]
    pub k2: Vec<i64>,
    /// Point the trajectory passes through at its end, in chart coordinates
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub through: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Seed for the default end point
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: Common,
    /// Mark the generators at this distance b - a
    #[arg(long)]
    pub dist: Option<i64>,
    /// Draw the gradient tree for the triple A,B,C
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tree: Vec<i64>,
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<i64>,
    #[arg(long, value_delimiter = ',')]
    pub k2: Vec<i64>,
    /// Graph the sections for a range of degrees, e.g. 0..4 (inclusive)
    #[arg(long, allow_hyphen_values = true)]
    pub sections: Option<String>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("WPSHMS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("WPSHMS_THREADS must be a positive integer, got {raw:?}")))?;
    // fails only if a pool already exists, which cannot happen this early
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Info(c) => commands::info(&c),
        Command::Category(c) => commands::category(&c),
        Command::Verify(v) => commands::verify(&v),
        Command::Flow(f) => commands::flow(&f),
        Command::Plot(p) => plot::run(&p),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
