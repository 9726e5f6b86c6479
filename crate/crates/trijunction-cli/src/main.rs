use clap::Parser;
use std::process::ExitCode;

use trijunction_cli::commands::{execute, Cli};

fn main() -> ExitCode {
    match execute(&Cli::parse()) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(json) => {
            eprintln!("{json}");
            ExitCode::from(1)
        }
    }
}
