use std::process::ExitCode;

use clap::Parser;
use dupdiv::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
