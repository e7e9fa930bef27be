//! Library half of the `selfsim` binary: configuration, output formats and
//! the three subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use selfsim_core::Method;

use crate::config::{CommonArgs, Resolver, Suite, DEFAULT_N, SEED_ENV};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "selfsim",
    version,
    about = "Simulate and verify self-similar Gaussian processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and write them as CSV or JSON.
    Simulate(CommonArgs),
    /// Run a verification suite and write a JSON report; exit 0 iff it passes.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        /// Reference method for the equivalence suite.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Time methods along a ladder of grid sizes.
    Bench(CommonArgs),
}

const BENCH_LADDER: [usize; 5] = [1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];

pub fn run(cli: Cli) -> CliResult<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let resolver = |config: &Option<PathBuf>| Resolver::new(config.as_deref(), env_seed.clone());
    match cli.command {
        Command::Simulate(args) => {
            let config = resolver(&args.config)?.resolve(args, None, None, 1, &[Method::Lamperti], &[DEFAULT_N])?;
            commands::simulate(&config)
        }
        Command::Verify {
            common,
            suite,
            baseline,
        } => {
            let config = resolver(&common.config)?.resolve(
                common,
                suite,
                baseline,
                20_000,
                &[Method::Lamperti],
                &[DEFAULT_N],
            )?;
            commands::verify(&config)
        }
        Command::Bench(args) => {
            let config =
                resolver(&args.config)?.resolve(args, None, None, 20, &[Method::DaviesHarte], &BENCH_LADDER)?;
            commands::bench(&config)
        }
    }
}
