mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Globals;
use input::Sink;

#[derive(Parser, Debug)]
#[command(name = "tgeo", version, about = "World-function geometry toolkit")]
struct Cli {
    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every random draw (overrides config files)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Equality tolerance for predicates
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate the world function between two points
    Sigma(commands::SigmaArgs),
    /// Scalar product of two vectors
    Product(commands::ProductArgs),
    /// Equivalence, parallelism or collinearity of two vectors
    Equiv(commands::EquivArgs),
    /// Gram matrix of a skeleton
    Gram(commands::GramArgs),
    /// Sample-based check of the Euclideaness conditions
    EuclidCheck(commands::EuclidArgs),
    /// Find skeletons equivalent to a given one
    Solve(commands::SolveArgs),
    /// Sum of two vectors in either order
    Sum(commands::SumArgs),
    /// Multiply a vector by a scalar
    Scale(commands::ScaleArgs),
    /// Inspect objects of a scene
    Object(commands::ObjectArgs),
    /// Sample the tube around one chain link
    Tube(commands::TubeArgs),
    /// Run an ensemble of stochastic world chains
    Chain(commands::ChainArgs),
    /// Integrate the ensemble hydrodynamics for a Gaussian packet
    Ensemble(commands::EnsembleArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("tgeo: {e}");
            return ExitCode::from(2);
        }
    }
    let g = Globals { sink: Sink::new(cli.output), seed: cli.seed, tol: cli.tol };
    let r = match cli.cmd {
        Cmd::Sigma(a) => commands::sigma(a, &g),
        Cmd::Product(a) => commands::product(a, &g),
        Cmd::Equiv(a) => commands::equiv(a, &g),
        Cmd::Gram(a) => commands::gram(a, &g),
        Cmd::EuclidCheck(a) => commands::euclid_check(a, &g),
        Cmd::Solve(a) => commands::solve(a, &g),
        Cmd::Sum(a) => commands::sum(a, &g),
        Cmd::Scale(a) => commands::scale(a, &g),
        Cmd::Object(a) => commands::object(a, &g),
        Cmd::Tube(a) => commands::tube(a, &g),
        Cmd::Chain(a) => commands::chain(a, &g),
        Cmd::Ensemble(a) => commands::ensemble(a, &g),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tgeo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
