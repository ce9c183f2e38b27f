mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const IO_OR_CONFIG: u8 = 2;
    pub const NO_CONSENSUS: u8 = 3;
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::IO_OR_CONFIG)
        }
    }
}
