use std::process::ExitCode;

use clap::Parser;
use selfsim_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selfsim: {e}");
            e.exit_code()
        }
    }
}
