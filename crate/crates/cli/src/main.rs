use std::process::ExitCode;

use clap::Parser;
use haris_cli::{execute, init_logging, Cli};

fn main() -> ExitCode {
    init_logging();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
