//! Command-line front end for the `ssdl` library.
//!
//! Every subcommand is seeded and configuration-driven: the fully resolved
//! parameter set (defaults expanded) is written as `config.json` next to the
//! outputs, and re-running with `--config <that file>` reproduces every
//! output byte for byte. All tables are CSV, summaries are JSON documents,
//! and plots are self-contained SVG — none of them embed timestamps or any
//! other run-dependent noise.
//!
//! Exit codes: `0` success; `2` configuration or contract error (bad flags,
//! out-of-domain parameters, malformed inputs); `3` numerical failure
//! (divergence, a failed self-check); `4` a computation refused because its
//! size is infeasible; `1` an i/o failure.

mod ops;
mod plot;

use clap::{Parser, Subcommand};
use ssdl::Error;

#[derive(Parser)]
#[command(
    name = "ssdl",
    version,
    about = "Sparse deep-network posteriors: theory tables, fits, studies, and demos",
    propagate_version = true
)]
struct Cli {
    /// Worker threads for parallel study cells (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the asymptotic recipe (depth, width, sparsity, rate) for one
    /// regression problem and print or write the report.
    Theory(ops::TheoryCmd),
    /// Run the trans-dimensional sampler on a dataset and write the
    /// posterior summary.
    Fit(ops::FitCmd),
    /// Concentration rate study: replicate posterior fits over a grid of
    /// sample sizes, with per-cell CSV rows, medians, and a log-log fit.
    RateStudy(ops::RateStudyCmd),
    /// Build the approximation gadgets, measure their sup errors against
    /// the claimed bounds, and audit the superposition identities.
    ApproxDemo(ops::ApproxDemoCmd),
    /// Train the deep and shallow benchmark templates on the polynomial
    /// target grid and compare validation errors.
    DeepVsShallow(ops::DeepVsShallowCmd),
    /// Compare the sampler against the exhaustive quadrature oracle on the
    /// canonical tiny instance and report the total-variation distance.
    OracleCheck(ops::OracleCheckCmd),
    /// Draw networks from the prior and write them to a text file.
    SamplePrior(ops::SamplePriorCmd),
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch(_)
        | Error::InvalidArgument(_)
        | Error::ContractViolation(_)
        | Error::Parse(_)
        | Error::Json(_) => 2,
        Error::Numerical(_) => 3,
        Error::Infeasible(_) => 4,
        Error::Io(_) => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Ignore the error if a pool already exists (only possible in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    let result = match &cli.command {
        Command::Theory(cmd) => cmd.run(),
        Command::Fit(cmd) => cmd.run(),
        Command::RateStudy(cmd) => cmd.run(),
        Command::ApproxDemo(cmd) => cmd.run(),
        Command::DeepVsShallow(cmd) => cmd.run(),
        Command::OracleCheck(cmd) => cmd.run(),
        Command::SamplePrior(cmd) => cmd.run(),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
