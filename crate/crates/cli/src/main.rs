//! `fraclim`: command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, parse or I/O
//! error, 3 resource guard.

mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = e
                .downcast_ref::<fraclim_core::Error>()
                .is_some_and(|c| matches!(c, fraclim_core::Error::ResourceGuard { .. }));
            ExitCode::from(if guard { 3 } else { 2 })
        }
    }
}
