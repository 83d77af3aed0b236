use std::process::ExitCode;

use clap::Parser;
use secgame::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
