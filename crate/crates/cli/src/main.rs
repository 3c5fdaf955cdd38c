use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mergedist::fuzz::Mutant;
use mergedist::metrics::DEFAULT_BUDGET;
use mergedist::{Exponent, TOLERANCE};

mod commands;
mod error;
mod input;
mod report;

use error::CliError;

/// Distances between merge trees, with certificates.
#[derive(Debug, Parser)]
#[command(name = "mergedist", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Exponent p: a number >= 1 or `inf`.
    #[arg(long, global = true, default_value = "1")]
    pub p: Exponent,
    /// Effort bound for the semi-distance search.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Pivot tree for the presentation bracket (repeatable).
    #[arg(long, global = true)]
    pub pivot: Vec<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Absolute tolerance for invariant checks.
    #[arg(long, global = true, default_value_t = TOLERANCE)]
    pub tolerance: f64,
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a merge tree file and list every broken invariant.
    Validate { tree: PathBuf },
    /// Elder-rule barcode of a merge tree.
    Barcode { tree: PathBuf },
    /// p-Wasserstein distance between two barcodes (or the barcodes of two trees).
    Wasserstein { a: PathBuf, b: PathBuf },
    /// p-cophenetic distance between two trees.
    Cophenetic {
        m: PathBuf,
        n: PathBuf,
        /// Largest number of labels to consider (default: leaves of M + leaves of N).
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Interleaving distance between two trees, with a witness.
    Interleaving { m: PathBuf, n: PathBuf },
    /// Certified bracket for the p-presentation distance.
    Presentation { m: PathBuf, n: PathBuf },
    /// Realize a compatible pair of presentations by two functions on one complex.
    Lift { pm: PathBuf, pn: PathBuf },
    /// Sublevel merge trees and incidence presentations of cellular functions.
    Filtrate { input: PathBuf },
    /// Run the seeded invariant suite.
    Fuzz {
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Where to write the shrunk counterexample if a check fails.
        #[arg(long, default_value = "mergedist-reproducer.json")]
        reproducer: PathBuf,
        #[arg(long, hide = true)]
        mutant: Option<MutantArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MutantArg {
    DropTriangleCheck,
}

impl From<MutantArg> for Mutant {
    fn from(m: MutantArg) -> Self {
        match m {
            MutantArg::DropTriangleCheck => Mutant::DropTriangleCheck,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.config;
    match cli.command {
        Command::Validate { tree } => commands::validate(&tree, g),
        Command::Barcode { tree } => commands::barcode(&tree, g),
        Command::Wasserstein { a, b } => commands::wasserstein(&a, &b, g),
        Command::Cophenetic { m, n, k_max } => commands::cophenetic(&m, &n, k_max, g),
        Command::Interleaving { m, n } => commands::interleaving(&m, &n, g),
        Command::Presentation { m, n } => commands::presentation(&m, &n, g),
        Command::Lift { pm, pn } => commands::lift(&pm, &pn, g),
        Command::Filtrate { input } => commands::filtrate(&input, g),
        Command::Fuzz { trials, reproducer, mutant } => commands::fuzz(trials, &reproducer, mutant.map(Into::into), g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
